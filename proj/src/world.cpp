#include "causeway/world.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace causeway {

using Json = nlohmann::ordered_json;

const char* to_string(FailReason reason) {
  switch (reason) {
    case FailReason::None: return "none";
    case FailReason::BadSpec: return "bad_spec";
    case FailReason::TooFar: return "too_far";
    case FailReason::NoPath: return "no_path";
    case FailReason::Occupied: return "occupied";
    case FailReason::NoSupport: return "no_support";
    case FailReason::MissingItem: return "missing_item";
    case FailReason::NotEquipped: return "not_equipped";
    case FailReason::NoContainer: return "no_container";
    case FailReason::InsufficientStock: return "insufficient_stock";
    case FailReason::NoSuchBlock: return "no_such_block";
    case FailReason::ProtectedBlock: return "protected_block";
    case FailReason::WrongTool: return "wrong_tool";
    case FailReason::NoSuchEntity: return "no_such_entity";
    case FailReason::NoRecipe: return "no_recipe";
    case FailReason::NoStation: return "no_station";
    case FailReason::MissingIngredients: return "missing_ingredients";
    case FailReason::MissingFuel: return "missing_fuel";
    case FailReason::NoMechanism: return "no_mechanism";
    case FailReason::NoUseRule: return "no_use_rule";
    case FailReason::UnknownTarget: return "unknown_target";
  }
  return "?";
}

namespace {

constexpr Vec3 kUp{0, 1, 0};
constexpr Vec3 kDown{0, -1, 0};

void take_items(std::map<std::string, int>& inv, const std::string& item, int amount) {
  auto it = inv.find(item);
  it->second -= amount;
  if (it->second <= 0) inv.erase(it);
}

int held(const std::map<std::string, int>& inv, const std::string& item) {
  auto it = inv.find(item);
  return it == inv.end() ? 0 : it->second;
}

}  // namespace

World::World(WorldConfig config, RecipeBook recipes, LootTable loot, UseRules use_rules)
    : config_(std::move(config)),
      recipes_(std::move(recipes)),
      loot_(std::move(loot)),
      use_rules_(std::move(use_rules)) {}

void World::set_block(const Vec3& pos, const std::string& kind,
                      std::optional<std::string> facing) {
  blocks_[pos] = Block{kind, std::move(facing)};
}

void World::fill_blocks(const Vec3& from, const Vec3& to, const std::string& kind) {
  Vec3 lo{std::min(from.x, to.x), std::min(from.y, to.y), std::min(from.z, to.z)};
  Vec3 hi{std::max(from.x, to.x), std::max(from.y, to.y), std::max(from.z, to.z)};
  for (int x = lo.x; x <= hi.x; ++x) {
    for (int y = lo.y; y <= hi.y; ++y) {
      for (int z = lo.z; z <= hi.z; ++z) set_block({x, y, z}, kind);
    }
  }
}

void World::add_container(const Vec3& pos, std::map<std::string, int> items) {
  containers_[pos] = std::move(items);
  set_block(pos, "chest");
}

void World::add_mechanism(const Vec3& pos, bool on) {
  mechanisms_[pos] = on;
}

int World::add_entity(const std::string& kind, const Vec3& pos) {
  int id = next_entity_id_++;
  entities_[id] = Entity{id, kind, pos, true};
  return id;
}

void World::add_agent(int id, const Vec3& pos) {
  agents_[id] = AgentState{id, pos, {}, ""};
}

void World::give_item(int agent_id, const std::string& item, int amount) {
  agent_mut(agent_id).inventory[item] += amount;
}

void World::reset_audit() {
  expected_items_ = item_totals();
}

AgentState& World::agent_mut(int id) {
  auto it = agents_.find(id);
  if (it == agents_.end()) {
    throw Error(ErrorCode::UnknownAgent, "no agent with id " + std::to_string(id));
  }
  return it->second;
}

const AgentState& World::agent(int id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) {
    throw Error(ErrorCode::UnknownAgent, "no agent with id " + std::to_string(id));
  }
  return it->second;
}

int World::cost_of(ActionKind kind) const {
  auto it = config_.action_costs.find(kind);
  if (it != config_.action_costs.end()) return it->second;
  switch (kind) {
    case ActionKind::PlaceBlock: return 2;
    case ActionKind::MineBlock: return 2;
    case ActionKind::Craft: return 4;
    case ActionKind::Smelt: return 8;
    default: return 1;
  }
}

ActionResult World::fail(FailReason reason, ActionKind kind, const std::string& detail) {
  (void)kind;
  clock_ += 1;  // failed attempts still burn time
  return {false, reason, 1, detail};
}

ActionResult World::success(int cost, bool mutated, const std::string& detail) {
  clock_ += static_cast<std::uint64_t>(cost);
  if (mutated) ++mutation_count_;
  return {true, FailReason::None, cost, detail};
}

bool World::within_reach(const Vec3& agent_pos, const Vec3& target) const {
  return chebyshev(agent_pos, target) <= config_.reach;
}

void World::adjust_expected(const std::string& item, int delta) {
  expected_items_[item] += delta;
  if (expected_items_[item] == 0) expected_items_.erase(item);
}

std::optional<Block> World::block_at(const Vec3& pos) const {
  auto it = blocks_.find(pos);
  if (it == blocks_.end()) return std::nullopt;
  return it->second;
}

std::optional<bool> World::mechanism_at(const Vec3& pos) const {
  auto it = mechanisms_.find(pos);
  if (it == mechanisms_.end()) return std::nullopt;
  return it->second;
}

int World::container_stock(const Vec3& pos, const std::string& item) const {
  auto it = containers_.find(pos);
  if (it == containers_.end()) return 0;
  return held(it->second, item);
}

bool World::walkable(const Vec3& pos) const {
  return !solid(pos) && !solid(pos + kUp) && solid(pos + kDown);
}

std::optional<std::vector<Vec3>> World::find_path(const Vec3& from, const Vec3& target,
                                                  int arrive_within) const {
  auto arrived = [&](const Vec3& c) { return chebyshev(c, target) <= arrive_within; };
  if (arrived(from)) return std::vector<Vec3>{};

  static const Vec3 kDirs[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 0, 1}, {0, 0, -1}};
  std::map<Vec3, Vec3> came_from;
  std::deque<Vec3> frontier{from};
  came_from[from] = from;
  int expanded = 0;
  while (!frontier.empty()) {
    Vec3 cur = frontier.front();
    frontier.pop_front();
    if (++expanded > config_.bfs_node_cap) return std::nullopt;
    for (const Vec3& d : kDirs) {
      Vec3 flat = cur + d;
      Vec3 step = flat;
      if (!walkable(step)) {
        step = flat + kUp;  // climb one, needs headroom above the current cell
        if (!walkable(step) || solid(cur + kUp + kUp)) {
          step = flat + kDown;  // drop one
          if (!walkable(step)) continue;
        }
      }
      if (came_from.count(step)) continue;
      came_from[step] = cur;
      if (arrived(step)) {
        std::vector<Vec3> path{step};
        Vec3 walk = step;
        while (came_from[walk] != walk) {
          walk = came_from[walk];
          path.push_back(walk);
        }
        std::reverse(path.begin(), path.end());
        path.erase(path.begin());  // drop the start cell
        return path;
      }
      frontier.push_back(step);
    }
  }
  return std::nullopt;
}

std::vector<Entity> World::find_entities(const std::string& kind, const Vec3& center,
                                         int radius) const {
  std::vector<Entity> hits;
  for (const auto& [id, e] : entities_) {
    if (!e.alive || e.kind != kind) continue;
    if (chebyshev(e.pos, center) > radius) continue;
    hits.push_back(e);
  }
  std::sort(hits.begin(), hits.end(), [&](const Entity& a, const Entity& b) {
    int da = chebyshev(a.pos, center);
    int db = chebyshev(b.pos, center);
    return std::tie(da, a.pos, a.id) < std::tie(db, b.pos, b.id);
  });
  return hits;
}

std::vector<Vec3> World::find_blocks(const std::string& kind, const Vec3& center,
                                     int radius) const {
  std::vector<Vec3> hits;
  for (const auto& [pos, block] : blocks_) {
    if (block.kind != kind) continue;
    if (chebyshev(pos, center) > radius) continue;
    hits.push_back(pos);
  }
  return hits;  // map order is already position order
}

ActionResult World::apply(int agent_id, const ActionSpec& spec) {
  AgentState& a = agent_mut(agent_id);
  switch (spec.kind) {
    case ActionKind::NavigateTo: return do_navigate(a, spec);
    case ActionKind::CheckContainer: return do_check_container(a, spec);
    case ActionKind::WithdrawItem: return do_withdraw(a, spec);
    case ActionKind::ScanEntities: return do_scan(a, spec);
    case ActionKind::Equip: return do_equip(a, spec);
    case ActionKind::PlaceBlock: return do_place(a, spec);
    case ActionKind::Handover: return do_handover(a, spec);
    case ActionKind::Craft: return do_craft(a, spec, false);
    case ActionKind::Smelt: return do_craft(a, spec, true);
    case ActionKind::MineBlock: return do_mine(a, spec);
    case ActionKind::Toggle: return do_toggle(a, spec);
    case ActionKind::UseOn: return do_use_on(a, spec);
    case ActionKind::Attack: return do_attack(a, spec);
  }
  return fail(FailReason::BadSpec, spec.kind, "unknown action kind");
}

ActionResult World::do_navigate(AgentState& a, const ActionSpec& spec) {
  if (!spec.pos) return fail(FailReason::BadSpec, spec.kind, "navigate_to needs a position");
  auto path = find_path(a.pos, *spec.pos, std::max(spec.distance, 0));
  if (!path) return fail(FailReason::NoPath, spec.kind, "no route to " + to_string(*spec.pos));
  if (path->empty()) return success(0, false, "already at " + to_string(a.pos));
  a.pos = path->back();
  int steps = static_cast<int>(path->size());
  return success(steps * cost_of(ActionKind::NavigateTo), true,
                 "moved " + std::to_string(steps) + " steps to " + to_string(a.pos));
}

ActionResult World::do_check_container(AgentState& a, const ActionSpec& spec) {
  Vec3 pos = spec.container ? *spec.container : spec.pos.value_or(Vec3{});
  if (!spec.container && !spec.pos) {
    return fail(FailReason::BadSpec, spec.kind, "check_container needs a container position");
  }
  auto it = containers_.find(pos);
  if (it == containers_.end()) {
    return fail(FailReason::NoContainer, spec.kind, "no container at " + to_string(pos));
  }
  if (!within_reach(a.pos, pos)) {
    return fail(FailReason::TooFar, spec.kind, "container at " + to_string(pos));
  }
  std::ostringstream os;
  os << "container " << to_string(pos) << " holds";
  for (const auto& [item, count] : it->second) os << " " << item << "x" << count;
  return success(cost_of(spec.kind), false, os.str());
}

ActionResult World::do_withdraw(AgentState& a, const ActionSpec& spec) {
  if (!spec.container) {
    return fail(FailReason::BadSpec, spec.kind, "withdraw_item needs a container position");
  }
  if (spec.item.empty() || spec.amount <= 0) {
    return fail(FailReason::BadSpec, spec.kind, "withdraw_item needs an item and amount");
  }
  auto it = containers_.find(*spec.container);
  if (it == containers_.end()) {
    return fail(FailReason::NoContainer, spec.kind, "no container at " + to_string(*spec.container));
  }
  if (!within_reach(a.pos, *spec.container)) {
    return fail(FailReason::TooFar, spec.kind, "container at " + to_string(*spec.container));
  }
  if (held(it->second, spec.item) < spec.amount) {
    return fail(FailReason::InsufficientStock, spec.kind,
                spec.item + " short in container " + to_string(*spec.container));
  }
  take_items(it->second, spec.item, spec.amount);
  a.inventory[spec.item] += spec.amount;
  return success(cost_of(spec.kind), true,
                 "took " + std::to_string(spec.amount) + " " + spec.item);
}

ActionResult World::do_scan(AgentState& a, const ActionSpec& spec) {
  int found = 0;
  for (const auto& [id, e] : entities_) {
    if (e.alive && (spec.item.empty() || e.kind == spec.item) &&
        chebyshev(e.pos, a.pos) <= config_.scan_radius) {
      ++found;
    }
  }
  return success(cost_of(spec.kind), false, "spotted " + std::to_string(found) + " entities");
}

ActionResult World::do_equip(AgentState& a, const ActionSpec& spec) {
  if (spec.item.empty()) {
    if (a.equipped.empty()) return success(cost_of(spec.kind), false, "hands already free");
    a.equipped.clear();
    return success(cost_of(spec.kind), true, "unequipped");
  }
  if (held(a.inventory, spec.item) < 1) {
    return fail(FailReason::MissingItem, spec.kind, spec.item + " not in inventory");
  }
  if (a.equipped == spec.item) return success(cost_of(spec.kind), false, "already holding " + spec.item);
  a.equipped = spec.item;
  return success(cost_of(spec.kind), true, "equipped " + spec.item);
}

ActionResult World::do_place(AgentState& a, const ActionSpec& spec) {
  if (!spec.pos) return fail(FailReason::BadSpec, spec.kind, "place_block needs a position");
  if (spec.item.empty()) return fail(FailReason::BadSpec, spec.kind, "place_block needs a block kind");
  const Vec3 pos = *spec.pos;
  if (!within_reach(a.pos, pos)) return fail(FailReason::TooFar, spec.kind, to_string(pos));
  if (solid(pos) || mechanisms_.count(pos)) {
    return fail(FailReason::Occupied, spec.kind, to_string(pos) + " is not empty");
  }
  for (const auto& [id, other] : agents_) {
    if (other.pos == pos || other.pos + kUp == pos) {
      return fail(FailReason::Occupied, spec.kind, "agent " + std::to_string(id) + " is in the way");
    }
  }
  if (!solid(pos + kDown)) {
    return fail(FailReason::NoSupport, spec.kind, "nothing under " + to_string(pos));
  }
  if (held(a.inventory, spec.item) < 1) {
    return fail(FailReason::MissingItem, spec.kind, spec.item + " not in inventory");
  }
  if (a.equipped != spec.item) {
    return fail(FailReason::NotEquipped, spec.kind, "holding '" + a.equipped + "'");
  }
  take_items(a.inventory, spec.item, 1);
  if (held(a.inventory, spec.item) == 0 && a.equipped == spec.item) a.equipped.clear();
  blocks_[pos] = Block{spec.item, spec.facing};
  adjust_expected(spec.item, -1);
  return success(cost_of(spec.kind), true, "placed " + spec.item + " at " + to_string(pos));
}

ActionResult World::do_handover(AgentState& a, const ActionSpec& spec) {
  if (spec.target_agent < 0 || !agents_.count(spec.target_agent)) {
    return fail(FailReason::UnknownTarget, spec.kind, "no such agent");
  }
  if (spec.target_agent == a.id) {
    return fail(FailReason::BadSpec, spec.kind, "cannot hand over to self");
  }
  if (spec.item.empty() || spec.amount <= 0) {
    return fail(FailReason::BadSpec, spec.kind, "handover needs an item and amount");
  }
  AgentState& other = agents_.at(spec.target_agent);
  if (!within_reach(a.pos, other.pos)) {
    return fail(FailReason::TooFar, spec.kind, "agent " + std::to_string(other.id));
  }
  if (held(a.inventory, spec.item) < spec.amount) {
    return fail(FailReason::MissingItem, spec.kind, spec.item);
  }
  take_items(a.inventory, spec.item, spec.amount);
  if (held(a.inventory, spec.item) == 0 && a.equipped == spec.item) a.equipped.clear();
  other.inventory[spec.item] += spec.amount;
  return success(cost_of(spec.kind), true,
                 "gave " + std::to_string(spec.amount) + " " + spec.item + " to agent " +
                     std::to_string(other.id));
}

ActionResult World::do_craft(AgentState& a, const ActionSpec& spec, bool furnace) {
  if (spec.item.empty() || spec.amount <= 0) {
    return fail(FailReason::BadSpec, spec.kind, "craft needs an item and amount");
  }
  auto it = recipes_.find(spec.item);
  if (it == recipes_.end()) {
    return fail(FailReason::NoRecipe, spec.kind, "no recipe for " + spec.item);
  }
  const RecipeEntry& recipe = it->second;
  if (furnace != recipe.needs_furnace) {
    return fail(FailReason::NoRecipe, spec.kind,
                spec.item + (recipe.needs_furnace ? " needs a furnace" : " is not smelted"));
  }
  const char* station = recipe.needs_furnace ? "furnace" : "crafting_table";
  if (recipe.needs_table || recipe.needs_furnace) {
    if (find_blocks(station, a.pos, config_.reach).empty()) {
      return fail(FailReason::NoStation, spec.kind, std::string("no ") + station + " in reach");
    }
  }
  for (const auto& [ing, per_batch] : recipe.ingredients) {
    if (held(a.inventory, ing) < per_batch * spec.amount) {
      return fail(FailReason::MissingIngredients, spec.kind, ing + " short");
    }
  }
  std::string fuel = spec.fuel.empty() ? "coal" : spec.fuel;
  int fuel_needed = recipe.fuel_per_unit * spec.amount;
  if (fuel_needed > 0 && held(a.inventory, fuel) < fuel_needed) {
    return fail(FailReason::MissingFuel, spec.kind, fuel + " short");
  }
  for (const auto& [ing, per_batch] : recipe.ingredients) {
    take_items(a.inventory, ing, per_batch * spec.amount);
    adjust_expected(ing, -per_batch * spec.amount);
  }
  if (fuel_needed > 0) {
    take_items(a.inventory, fuel, fuel_needed);
    adjust_expected(fuel, -fuel_needed);
  }
  int made = recipe.output_count * spec.amount;
  a.inventory[spec.item] += made;
  adjust_expected(spec.item, made);
  return success(cost_of(spec.kind), true,
                 (furnace ? "smelted " : "crafted ") + std::to_string(made) + " " + spec.item);
}

ActionResult World::do_mine(AgentState& a, const ActionSpec& spec) {
  if (!spec.pos) return fail(FailReason::BadSpec, spec.kind, "mine_block needs a position");
  const Vec3 pos = *spec.pos;
  auto it = blocks_.find(pos);
  if (it == blocks_.end()) {
    return fail(FailReason::NoSuchBlock, spec.kind, "nothing at " + to_string(pos));
  }
  if (!within_reach(a.pos, pos)) return fail(FailReason::TooFar, spec.kind, to_string(pos));
  if (containers_.count(pos)) {
    return fail(FailReason::ProtectedBlock, spec.kind, "containers cannot be mined");
  }
  const std::string kind = it->second.kind;
  std::map<std::string, int> drops{{kind, 1}};
  if (auto loot = loot_.find(kind); loot != loot_.end()) {
    if (!loot->second.required_tool.empty() && a.equipped != loot->second.required_tool) {
      return fail(FailReason::WrongTool, spec.kind, kind + " needs " + loot->second.required_tool);
    }
    drops = loot->second.drops;
  }
  blocks_.erase(it);
  for (const auto& [item, count] : drops) {
    a.inventory[item] += count;
    adjust_expected(item, count);
  }
  std::ostringstream os;
  os << "mined " << kind << " at " << to_string(pos);
  return success(cost_of(spec.kind), true, os.str());
}

ActionResult World::do_toggle(AgentState& a, const ActionSpec& spec) {
  if (!spec.pos) return fail(FailReason::BadSpec, spec.kind, "toggle needs a position");
  const Vec3 pos = *spec.pos;
  auto it = mechanisms_.find(pos);
  if (it == mechanisms_.end()) {
    return fail(FailReason::NoMechanism, spec.kind, "no mechanism at " + to_string(pos));
  }
  if (!within_reach(a.pos, pos)) return fail(FailReason::TooFar, spec.kind, to_string(pos));
  bool before = it->second;
  bool after = spec.desired_state ? *spec.desired_state : !before;
  it->second = after;
  std::ostringstream os;
  os << "mechanism " << to_string(pos) << " " << (before ? "on" : "off") << " -> "
     << (after ? "on" : "off");
  return success(cost_of(spec.kind), before != after, os.str());
}

ActionResult World::do_use_on(AgentState& a, const ActionSpec& spec) {
  if (spec.tool.empty() || spec.item.empty()) {
    return fail(FailReason::BadSpec, spec.kind, "use_on needs a tool and a target kind");
  }
  const UseRule* rule = nullptr;
  for (const auto& r : use_rules_) {
    if (r.tool == spec.tool && r.target == spec.item) {
      rule = &r;
      break;
    }
  }
  if (!rule) {
    return fail(FailReason::NoUseRule, spec.kind, spec.tool + " on " + spec.item);
  }
  if (held(a.inventory, spec.tool) < 1) {
    return fail(FailReason::MissingItem, spec.kind, spec.tool + " not in inventory");
  }
  auto targets = find_entities(spec.item, a.pos, config_.reach);
  if (targets.empty()) {
    return fail(FailReason::NoSuchEntity, spec.kind, "no " + spec.item + " in reach");
  }
  if (rule->consumes_tool) {
    take_items(a.inventory, spec.tool, 1);
    adjust_expected(spec.tool, -1);
    if (held(a.inventory, spec.tool) == 0 && a.equipped == spec.tool) a.equipped.clear();
  }
  for (const auto& [item, count] : rule->produces) {
    a.inventory[item] += count;
    adjust_expected(item, count);
  }
  return success(cost_of(spec.kind), true,
                 "used " + spec.tool + " on " + spec.item + " " + to_string(targets.front().pos));
}

ActionResult World::do_attack(AgentState& a, const ActionSpec& spec) {
  if (spec.item.empty()) return fail(FailReason::BadSpec, spec.kind, "attack needs a target kind");
  auto in_reach = find_entities(spec.item, a.pos, config_.reach);
  if (in_reach.empty()) {
    auto seen = find_entities(spec.item, a.pos, config_.scan_radius);
    if (seen.empty()) {
      return fail(FailReason::NoSuchEntity, spec.kind, "no " + spec.item + " nearby");
    }
    return fail(FailReason::TooFar, spec.kind,
                "nearest " + spec.item + " at " + to_string(seen.front().pos));
  }
  Entity& target = entities_.at(in_reach.front().id);
  target.alive = false;
  std::map<std::string, int> drops;
  if (auto loot = loot_.find(target.kind); loot != loot_.end()) drops = loot->second.drops;
  for (const auto& [item, count] : drops) {
    a.inventory[item] += count;
    adjust_expected(item, count);
  }
  std::ostringstream os;
  os << "felled " << target.kind << " at " << to_string(target.pos);
  return success(cost_of(spec.kind), true, os.str());
}

Observation World::observe(int agent_id) const {
  const AgentState& a = agent(agent_id);
  Observation obs;
  obs.agent_id = agent_id;
  obs.pos = a.pos;
  obs.inventory = a.inventory;
  obs.equipped = a.equipped;
  obs.clock = clock_;
  obs.mutation_count = mutation_count_;
  for (const auto& [id, e] : entities_) {
    if (e.alive && chebyshev(e.pos, a.pos) <= config_.scan_radius) {
      obs.scan.push_back({true, e.kind, e.pos, id});
    }
  }
  std::sort(obs.scan.begin(), obs.scan.end(), [](const ScanHit& l, const ScanHit& r) {
    return std::tie(l.pos, l.id) < std::tie(r.pos, r.id);
  });
  for (const auto& [pos, block] : blocks_) {
    if (block.kind != "chest" && block.kind != "crafting_table" && block.kind != "furnace") continue;
    if (chebyshev(pos, a.pos) <= config_.scan_radius) {
      obs.scan.push_back({false, block.kind, pos, -1});
    }
  }
  return obs;
}

bool World::postcondition_holds(int agent_id, const Postcondition& post) const {
  switch (post.kind) {
    case PostKind::None: return true;
    case PostKind::BlockPresent: {
      auto b = block_at(post.pos);
      return b && (post.item.empty() || b->kind == post.item);
    }
    case PostKind::BlockAbsent: return !solid(post.pos);
    case PostKind::AgentHasItem: return held(agent(agent_id).inventory, post.item) >= post.count;
    case PostKind::ContainerStocked: return container_stock(post.pos, post.item) >= post.count;
    case PostKind::MechanismState: {
      auto m = mechanism_at(post.pos);
      return m && *m == post.on;
    }
    case PostKind::AgentAt:
      return chebyshev(agent(agent_id).pos, post.pos) <= std::max(post.count, 0);
  }
  return false;
}

std::map<std::string, int> World::item_totals() const {
  std::map<std::string, int> totals;
  for (const auto& [id, a] : agents_) {
    for (const auto& [item, count] : a.inventory) totals[item] += count;
  }
  for (const auto& [pos, items] : containers_) {
    for (const auto& [item, count] : items) totals[item] += count;
  }
  for (auto it = totals.begin(); it != totals.end();) {
    it = it->second == 0 ? totals.erase(it) : std::next(it);
  }
  return totals;
}

bool World::audit_clean() const {
  return item_totals() == expected_items_;
}

Json World::to_json() const {
  Json j;
  j["clock"] = clock_;
  j["mutations"] = mutation_count_;
  j["blocks"] = Json::array();
  for (const auto& [pos, block] : blocks_) {
    Json b;
    b["pos"] = {pos.x, pos.y, pos.z};
    b["kind"] = block.kind;
    if (block.facing) b["facing"] = *block.facing;
    j["blocks"].push_back(b);
  }
  j["containers"] = Json::array();
  for (const auto& [pos, items] : containers_) {
    Json c;
    c["pos"] = {pos.x, pos.y, pos.z};
    c["items"] = items;
    j["containers"].push_back(c);
  }
  j["mechanisms"] = Json::array();
  for (const auto& [pos, on] : mechanisms_) {
    Json m;
    m["pos"] = {pos.x, pos.y, pos.z};
    m["on"] = on;
    j["mechanisms"].push_back(m);
  }
  j["entities"] = Json::array();
  for (const auto& [id, e] : entities_) {
    Json ent;
    ent["id"] = id;
    ent["kind"] = e.kind;
    ent["pos"] = {e.pos.x, e.pos.y, e.pos.z};
    ent["alive"] = e.alive;
    j["entities"].push_back(ent);
  }
  j["agents"] = Json::array();
  for (const auto& [id, a] : agents_) {
    Json ag;
    ag["id"] = id;
    ag["pos"] = {a.pos.x, a.pos.y, a.pos.z};
    ag["inventory"] = a.inventory;
    ag["equipped"] = a.equipped;
    j["agents"].push_back(ag);
  }
  return j;
}

std::uint64_t World::state_hash() const {
  return fnv1a(to_json().dump());
}

}  // namespace causeway
