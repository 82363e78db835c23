#include "causeway/agent.hpp"

#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace causeway {

using Json = nlohmann::ordered_json;

const char* to_string(ReflectOutcome outcome) {
  switch (outcome) {
    case ReflectOutcome::Continue: return "continue";
    case ReflectOutcome::Complete: return "complete";
    case ReflectOutcome::Stuck: return "stuck";
  }
  return "?";
}

void AgentMemory::note(const std::string& line) {
  action_log.push_back(line);
  while (action_log.size() > kLogCap) action_log.pop_front();
}

void AgentMemory::reset_for_subtask(const World& world) {
  consecutive_failures = 0;
  actions_on_subtask = 0;
  mutations_at_last_progress = world.mutation_count();
  last_ok = false;
  last_kind.reset();
}

void record_result(AgentMemory& memory, const World& world, const ActionSpec& spec,
                   const ActionResult& result) {
  std::ostringstream line;
  line << to_string(spec.kind);
  if (result.ok) {
    line << " ok";
  } else {
    line << " fail(" << to_string(result.reason) << ")";
  }
  if (!result.detail.empty()) line << ": " << result.detail;
  memory.note(line.str());
  memory.last_ok = result.ok;
  memory.last_kind = spec.kind;
  ++memory.actions_on_subtask;
  if (result.ok || world.mutation_count() != memory.mutations_at_last_progress) {
    memory.consecutive_failures = 0;
  } else {
    ++memory.consecutive_failures;
  }
  memory.mutations_at_last_progress = world.mutation_count();
}

std::string subtask_summary(int agent_id, const Subtask& subtask, ReflectOutcome outcome,
                            const AgentMemory& memory) {
  std::ostringstream os;
  os << "agent " << agent_id << " " << to_string(outcome) << " subtask " << subtask.id << " ("
     << subtask.description << ") after " << memory.action_log.size() << " logged actions";
  return os.str();
}

namespace {

ActionSpec navigate(const Vec3& target, int within) {
  ActionSpec spec;
  spec.kind = ActionKind::NavigateTo;
  spec.pos = target;
  spec.distance = within;
  return spec;
}

ActionSpec withdraw(const std::string& item, int amount, const Vec3& container) {
  ActionSpec spec;
  spec.kind = ActionKind::WithdrawItem;
  spec.item = item;
  spec.amount = amount;
  spec.container = container;
  return spec;
}

ActionSpec equip(const std::string& item) {
  ActionSpec spec;
  spec.kind = ActionKind::Equip;
  spec.item = item;
  return spec;
}

int held(const World& world, int agent_id, const std::string& item) {
  const auto& inv = world.agent(agent_id).inventory;
  auto it = inv.find(item);
  return it == inv.end() ? 0 : it->second;
}

bool in_reach(const World& world, int agent_id, const Vec3& target) {
  return chebyshev(world.agent(agent_id).pos, target) <= world.config().reach;
}

// The agent is standing where the block should go; sidestep in a direction
// rotated by the failure count so repeated attempts try new exits.
ActionSpec step_aside(const World& world, int agent_id, const AgentMemory& memory) {
  static const Vec3 kOffsets[4] = {{2, 0, 0}, {-2, 0, 0}, {0, 0, 2}, {0, 0, -2}};
  const Vec3& base = world.agent(agent_id).pos;
  return navigate(base + kOffsets[memory.consecutive_failures % 4], 1);
}

// Fetch `amount` of `item` from `source`: walk over if needed, then withdraw
// the shortfall. Returns the subtask's own action when nothing is missing.
std::optional<ActionSpec> fetch_if_missing(const World& world, int agent_id,
                                           const std::string& item, int amount,
                                           const std::optional<Vec3>& source) {
  if (held(world, agent_id, item) >= amount) return std::nullopt;
  if (!source) return std::nullopt;  // nowhere recorded; let the action fail honestly
  if (!in_reach(world, agent_id, *source)) {
    return navigate(*source, world.config().reach);
  }
  return withdraw(item, amount - held(world, agent_id, item), *source);
}

std::optional<Vec3> source_for(const Subtask& subtask, const std::string& item) {
  auto it = subtask.action.item_sources.find(item);
  if (it == subtask.action.item_sources.end()) return std::nullopt;
  return it->second;
}

}  // namespace

ActionSpec ScriptedPolicy::next_action(const World& world, int agent_id, const Subtask& subtask,
                                       AgentMemory& memory) {
  const ActionSpec& goal = subtask.action;
  const AgentState& self = world.agent(agent_id);

  switch (goal.kind) {
    case ActionKind::NavigateTo:
    case ActionKind::ScanEntities:
      return goal;

    case ActionKind::CheckContainer: {
      Vec3 pos = goal.container ? *goal.container : goal.pos.value_or(Vec3{});
      if (!in_reach(world, agent_id, pos)) return navigate(pos, world.config().reach);
      return goal;
    }

    case ActionKind::WithdrawItem: {
      if (goal.container && !in_reach(world, agent_id, *goal.container)) {
        return navigate(*goal.container, world.config().reach);
      }
      return goal;
    }

    case ActionKind::Equip:
      return goal;

    case ActionKind::PlaceBlock: {
      if (!goal.pos) return goal;
      if (held(world, agent_id, goal.item) < 1) {
        if (auto fetch = fetch_if_missing(world, agent_id, goal.item, 1, goal.container)) {
          return *fetch;
        }
        return goal;
      }
      if (self.equipped != goal.item) return equip(goal.item);
      if (self.pos == *goal.pos || self.pos + Vec3{0, 1, 0} == *goal.pos) {
        return step_aside(world, agent_id, memory);
      }
      if (!in_reach(world, agent_id, *goal.pos)) return navigate(*goal.pos, world.config().reach);
      return goal;
    }

    case ActionKind::Handover: {
      if (goal.target_agent < 0 || !world.agents().count(goal.target_agent)) return goal;
      Vec3 other = world.agent(goal.target_agent).pos;
      if (!in_reach(world, agent_id, other)) return navigate(other, world.config().reach);
      return goal;
    }

    case ActionKind::Craft:
    case ActionKind::Smelt: {
      auto recipe = world.recipes().find(goal.item);
      if (recipe == world.recipes().end()) return goal;
      for (const auto& [ing, per_batch] : recipe->second.ingredients) {
        int need = per_batch * goal.amount;
        if (auto fetch = fetch_if_missing(world, agent_id, ing, need, source_for(subtask, ing))) {
          return *fetch;
        }
      }
      if (recipe->second.fuel_per_unit > 0) {
        std::string fuel = goal.fuel.empty() ? "coal" : goal.fuel;
        int need = recipe->second.fuel_per_unit * goal.amount;
        if (auto fetch = fetch_if_missing(world, agent_id, fuel, need, source_for(subtask, fuel))) {
          return *fetch;
        }
      }
      const char* station = goal.kind == ActionKind::Smelt ? "furnace" : "crafting_table";
      bool needs_station = recipe->second.needs_table || recipe->second.needs_furnace;
      if (needs_station &&
          world.find_blocks(station, self.pos, world.config().reach).empty()) {
        if (goal.pos) return navigate(*goal.pos, world.config().reach);
        auto sites = world.find_blocks(station, self.pos, world.config().scan_radius);
        if (!sites.empty()) return navigate(sites.front(), world.config().reach);
      }
      return goal;
    }

    case ActionKind::MineBlock: {
      if (!goal.pos) return goal;
      if (auto entry = world.loot().find(world.block_at(*goal.pos)
                                             ? world.block_at(*goal.pos)->kind
                                             : goal.item);
          entry != world.loot().end() && !entry->second.required_tool.empty()) {
        const std::string& tool = entry->second.required_tool;
        if (self.equipped != tool) {
          if (held(world, agent_id, tool) >= 1) return equip(tool);
          if (auto fetch =
                  fetch_if_missing(world, agent_id, tool, 1, source_for(subtask, tool))) {
            return *fetch;
          }
        }
      }
      if (!in_reach(world, agent_id, *goal.pos)) return navigate(*goal.pos, world.config().reach);
      return goal;
    }

    case ActionKind::Toggle: {
      if (!goal.pos) return goal;
      if (!in_reach(world, agent_id, *goal.pos)) return navigate(*goal.pos, world.config().reach);
      return goal;
    }

    case ActionKind::UseOn: {
      if (held(world, agent_id, goal.tool) < 1) {
        if (auto fetch =
                fetch_if_missing(world, agent_id, goal.tool, 1, source_for(subtask, goal.tool))) {
          return *fetch;
        }
        return goal;
      }
      auto targets = world.find_entities(goal.item, self.pos, world.config().scan_radius);
      if (!targets.empty() && !in_reach(world, agent_id, targets.front().pos)) {
        return navigate(targets.front().pos, world.config().reach);
      }
      return goal;
    }

    case ActionKind::Attack: {
      auto targets = world.find_entities(goal.item, self.pos, world.config().scan_radius);
      if (!targets.empty() && !in_reach(world, agent_id, targets.front().pos)) {
        return navigate(targets.front().pos, world.config().reach);
      }
      return goal;
    }
  }
  return goal;
}

ReflectOutcome ScriptedPolicy::reflect(const World& world, int agent_id, const Subtask& subtask,
                                       const AgentMemory& memory) {
  if (subtask.post.kind == PostKind::None) {
    // Without an explicit postcondition the subtask stands for its goal
    // action, so a successful preparatory step (navigation, equipping) must
    // not count as done.
    if (memory.last_ok && memory.last_kind == subtask.action.kind) {
      return ReflectOutcome::Complete;
    }
  } else if (world.postcondition_holds(agent_id, subtask.post)) {
    return ReflectOutcome::Complete;
  }
  if (memory.consecutive_failures >= 3) return ReflectOutcome::Stuck;
  if (memory.actions_on_subtask >= AgentMemory::kActionBudget) return ReflectOutcome::Stuck;
  return ReflectOutcome::Continue;
}

std::optional<ActionSpec> parse_action_json(const std::string& text) {
  auto first = text.find_first_of('{');
  auto last = text.find_last_of('}');
  if (first == std::string::npos || last == std::string::npos || last < first) return std::nullopt;
  Json parsed = Json::parse(text.substr(first, last - first + 1), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  auto kind = action_kind_from(parsed.value("action", ""));
  if (!kind) return std::nullopt;

  ActionSpec spec;
  spec.kind = *kind;
  spec.item = parsed.value("item", "");
  spec.amount = parsed.value("amount", 1);
  spec.fuel = parsed.value("fuel", "");
  spec.tool = parsed.value("tool", "");
  spec.target_agent = parsed.value("target_agent", -1);
  spec.distance = parsed.value("distance", 0);
  auto read_vec = [&](const char* key) -> std::optional<Vec3> {
    if (!parsed.contains(key) || !parsed[key].is_array() || parsed[key].size() != 3) {
      return std::nullopt;
    }
    return Vec3{parsed[key][0].get<int>(), parsed[key][1].get<int>(), parsed[key][2].get<int>()};
  };
  spec.pos = read_vec("pos");
  spec.container = read_vec("container");
  if (parsed.contains("facing") && parsed["facing"].is_string()) {
    spec.facing = parsed["facing"].get<std::string>();
  }
  if (parsed.contains("state") && parsed["state"].is_boolean()) {
    spec.desired_state = parsed["state"].get<bool>();
  }
  return spec;
}

ActionSpec RemotePolicy::next_action(const World& world, int agent_id, const Subtask& subtask,
                                     AgentMemory& memory) {
  Observation obs = world.observe(agent_id);
  Json view;
  view["pos"] = {obs.pos.x, obs.pos.y, obs.pos.z};
  view["inventory"] = obs.inventory;
  view["equipped"] = obs.equipped;
  view["scan"] = Json::array();
  for (const auto& hit : obs.scan) {
    Json h;
    h["kind"] = hit.kind;
    h["pos"] = {hit.pos.x, hit.pos.y, hit.pos.z};
    h["entity"] = hit.is_entity;
    view["scan"].push_back(h);
  }
  std::ostringstream prompt;
  prompt << "You control one Minecraft bot. Current subtask: " << subtask.description << "\n"
         << "Observation: " << view.dump() << "\n"
         << "Reply with one JSON action: {\"action\": <navigate_to|check_container|withdraw_item|"
            "scan_entities|equip|place_block|handover|craft|smelt|mine_block|toggle|use_on|"
            "attack>, \"item\": <text>, \"pos\": [x,y,z], \"container\": [x,y,z], "
            "\"amount\": <int>, \"tool\": <text>, \"distance\": <int>}";
  if (auto reply = reasoner_.complete(prompt.str())) {
    if (auto action = parse_action_json(*reply)) return *action;
  }
  return fallback_.next_action(world, agent_id, subtask, memory);
}

ReflectOutcome RemotePolicy::reflect(const World& world, int agent_id, const Subtask& subtask,
                                     const AgentMemory& memory) {
  return fallback_.reflect(world, agent_id, subtask, memory);
}

}  // namespace causeway
