#include "causeway/planner.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace causeway {

using Json = nlohmann::ordered_json;

const char* to_string(GoalKind kind) {
  switch (kind) {
    case GoalKind::Construction: return "construction";
    case GoalKind::Cooking: return "cooking";
    case GoalKind::Escape: return "escape";
    case GoalKind::ItemGathering: return "item_gathering";
  }
  return "?";
}

std::optional<GoalKind> goal_kind_from(std::string_view name) {
  if (name == "construction") return GoalKind::Construction;
  if (name == "cooking") return GoalKind::Cooking;
  if (name == "escape") return GoalKind::Escape;
  if (name == "item_gathering" || name == "gathering") return GoalKind::ItemGathering;
  return std::nullopt;
}

namespace {

std::string fmt_count(int n, const std::string& item) {
  return std::to_string(n) + " " + item;
}

std::vector<Subtask> decompose_construction(const Goal& goal, const EnvSummary& env) {
  if (goal.blueprint.empty()) {
    throw Error(ErrorCode::DecompositionFailed, "blueprint is empty");
  }
  std::vector<BlueprintBlock> blocks = goal.blueprint;
  std::sort(blocks.begin(), blocks.end(), [](const BlueprintBlock& a, const BlueprintBlock& b) {
    return std::tie(a.pos.y, a.pos.x, a.pos.z) < std::tie(b.pos.y, b.pos.x, b.pos.z);
  });

  std::map<std::string, int> demand;
  for (const auto& b : blocks) ++demand[b.kind];

  std::vector<Subtask> out;
  int id = 1;
  std::map<std::string, std::optional<Vec3>> source;
  for (const auto& [kind, count] : demand) {
    source[kind] = env.find_container_with(kind);
    Subtask s;
    s.id = id++;
    s.action.kind = ActionKind::WithdrawItem;
    s.action.item = kind;
    s.action.amount = count;
    s.action.container = source[kind];
    s.post = {PostKind::AgentHasItem, {}, kind, count, false};
    s.description = "withdraw " + fmt_count(count, kind) +
                    (source[kind] ? " from chest " + to_string(*source[kind]) : " from storage");
    out.push_back(std::move(s));
  }
  for (const auto& b : blocks) {
    Subtask s;
    s.id = id++;
    s.action.kind = ActionKind::PlaceBlock;
    s.action.item = b.kind;
    s.action.pos = b.pos;
    s.action.facing = b.facing;
    s.action.container = source[b.kind];
    s.post = {PostKind::BlockPresent, b.pos, b.kind, 1, false};
    s.description = "place " + b.kind + " at " + to_string(b.pos);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Subtask> decompose_cooking(const Goal& goal, const EnvSummary& env) {
  const RecipeGoal& recipe = goal.recipe;
  if (recipe.ingredients.empty() && recipe.steps.empty()) {
    throw Error(ErrorCode::DecompositionFailed, "recipe has no ingredients or steps");
  }
  std::vector<Subtask> out;
  int id = 1;
  std::map<std::string, Vec3> sources;
  for (const auto& ing : recipe.ingredients) {
    Subtask s;
    s.id = id++;
    IngredientSource src;
    if (ing.source) {
      src = *ing.source;
    } else if (auto chest = env.find_container_with(ing.item)) {
      src = {SourceKind::Container, chest, ""};
    } else {
      throw Error(ErrorCode::DecompositionFailed, "no source for ingredient " + ing.item);
    }
    switch (src.kind) {
      case SourceKind::Container: {
        Vec3 chest = src.pos ? *src.pos : env.find_container_with(ing.item).value_or(Vec3{});
        sources[ing.item] = chest;
        s.action.kind = ActionKind::CheckContainer;
        s.action.item = ing.item;
        s.action.amount = ing.amount;
        s.action.container = chest;
        s.post = {PostKind::ContainerStocked, chest, ing.item, ing.amount, false};
        s.description = "verify " + fmt_count(ing.amount, ing.item) + " stocked in chest " +
                        to_string(chest);
        break;
      }
      case SourceKind::Mine: {
        Vec3 pos = src.pos ? *src.pos : env.nearest_block(ing.item).value_or(Vec3{});
        s.action.kind = ActionKind::MineBlock;
        s.action.pos = pos;
        s.action.item = ing.item;
        s.post = {PostKind::AgentHasItem, {}, ing.item, ing.amount, false};
        s.description = "harvest " + fmt_count(ing.amount, ing.item) + " at " + to_string(pos);
        break;
      }
      case SourceKind::Hunt: {
        s.action.kind = ActionKind::Attack;
        s.action.item = src.entity;
        s.action.distance = 16;
        s.post = {PostKind::AgentHasItem, {}, ing.item, ing.amount, false};
        s.description = "hunt " + src.entity + " for " + fmt_count(ing.amount, ing.item);
        break;
      }
    }
    out.push_back(std::move(s));
  }
  for (const auto& step : recipe.steps) {
    Subtask s;
    s.id = id++;
    s.action.kind = step.kind;
    s.action.item = step.item;
    s.action.amount = step.amount;
    s.action.fuel = step.fuel;
    if (step.kind == ActionKind::Smelt) {
      if (!env.furnaces.empty()) s.action.pos = env.furnaces.front();
    } else if (!env.crafting_tables.empty()) {
      s.action.pos = env.crafting_tables.front();
    }
    s.action.item_sources = sources;
    if (!step.fuel.empty()) {
      if (auto chest = env.find_container_with(step.fuel)) s.action.item_sources[step.fuel] = *chest;
    }
    s.post = {PostKind::AgentHasItem, {}, step.item, step.amount, false};
    s.description = std::string(step.kind == ActionKind::Smelt ? "smelt " : "craft ") +
                    fmt_count(step.amount, step.item);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Subtask> decompose_escape(const Goal& goal) {
  std::vector<Subtask> out;
  int id = 1;
  for (const auto& room : goal.rooms) {
    for (const auto& cond : room.conditions) {
      Subtask s;
      s.id = id++;
      s.action.kind = ActionKind::Toggle;
      s.action.pos = cond.pos;
      s.action.desired_state = cond.desired;
      s.post = {PostKind::MechanismState, cond.pos, "", 1, cond.desired};
      s.description = "set mechanism at " + to_string(cond.pos) + " to " +
                      (cond.desired ? "on" : "off") + " (" + room.name + ")";
      out.push_back(std::move(s));
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::DecompositionFailed, "no rooms or conditions");
  }
  return out;
}

std::vector<Subtask> decompose_gathering(const Goal& goal, const EnvSummary& env,
                                         const RuleEngine& engine) {
  if (goal.target.item.empty()) {
    throw Error(ErrorCode::DecompositionFailed, "no target item");
  }
  std::vector<Subtask> out;
  int id = 1;

  // Depth-limited acquisition plan: container, mineable block, recipe
  // expansion, then huntable entity.
  std::function<void(const std::string&, int, int)> plan = [&](const std::string& item, int amount,
                                                               int depth) {
    if (depth > 6) throw Error(ErrorCode::DecompositionFailed, "recipe chain too deep for " + item);
    if (auto chest = env.find_container_with(item)) {
      Subtask s;
      s.id = id++;
      s.action.kind = ActionKind::WithdrawItem;
      s.action.item = item;
      s.action.amount = amount;
      s.action.container = chest;
      s.post = {PostKind::AgentHasItem, {}, item, amount, false};
      s.description = "withdraw " + fmt_count(amount, item) + " from chest " + to_string(*chest);
      out.push_back(std::move(s));
      return;
    }
    for (const auto& [kind, positions] : env.blocks_by_kind) {
      const auto* loot = [&]() -> const LootEntry* {
        auto it = engine.loot().find(kind);
        return it == engine.loot().end() ? nullptr : &it->second;
      }();
      bool drops_item = (loot && loot->drops.count(item)) || (!loot && kind == item);
      if (!drops_item || positions.empty()) continue;
      int per_block = loot ? loot->drops.at(item) : 1;
      int blocks_needed = (amount + per_block - 1) / per_block;
      for (int i = 0; i < blocks_needed && i < static_cast<int>(positions.size()); ++i) {
        Subtask s;
        s.id = id++;
        s.action.kind = ActionKind::MineBlock;
        s.action.pos = positions[i];
        s.action.item = kind;
        s.post = {PostKind::AgentHasItem, {}, item, per_block * (i + 1), false};
        s.description = "mine " + kind + " at " + to_string(positions[i]);
        out.push_back(std::move(s));
      }
      return;
    }
    if (auto it = engine.recipes().find(item); it != engine.recipes().end()) {
      const RecipeEntry& recipe = it->second;
      int batches = (amount + recipe.output_count - 1) / recipe.output_count;
      for (const auto& [ing, per_batch] : recipe.ingredients) {
        plan(ing, per_batch * batches, depth + 1);
      }
      if (recipe.fuel_per_unit > 0) plan("coal", recipe.fuel_per_unit * batches, depth + 1);
      Subtask s;
      s.id = id++;
      s.action.kind = recipe.needs_furnace ? ActionKind::Smelt : ActionKind::Craft;
      s.action.item = item;
      s.action.amount = batches;
      if (recipe.fuel_per_unit > 0) s.action.fuel = "coal";
      if (recipe.needs_furnace && !env.furnaces.empty()) s.action.pos = env.furnaces.front();
      if (recipe.needs_table && !env.crafting_tables.empty()) s.action.pos = env.crafting_tables.front();
      s.post = {PostKind::AgentHasItem, {}, item, amount, false};
      s.description = (recipe.needs_furnace ? "smelt " : "craft ") + fmt_count(amount, item);
      out.push_back(std::move(s));
      return;
    }
    for (const auto& [kind, pos] : env.entities) {
      auto it = engine.loot().find(kind);
      if (it == engine.loot().end() || !it->second.drops.count(item)) continue;
      int per_kill = it->second.drops.at(item);
      int kills = (amount + per_kill - 1) / per_kill;
      for (int i = 0; i < kills; ++i) {
        Subtask s;
        s.id = id++;
        s.action.kind = ActionKind::Attack;
        s.action.item = kind;
        s.action.distance = 16;
        s.post = {PostKind::AgentHasItem, {}, item, per_kill * (i + 1), false};
        s.description = "hunt " + kind + " for " + item;
        out.push_back(std::move(s));
      }
      return;
    }
    throw Error(ErrorCode::DecompositionFailed, "no way to obtain " + item);
  };

  plan(goal.target.item, goal.target.amount, 0);
  return out;
}

std::optional<std::vector<Subtask>> parse_remote_nodes(const std::string& text) {
  auto first = text.find_first_of('[');
  auto last = text.find_last_of(']');
  if (first == std::string::npos || last == std::string::npos || last < first) return std::nullopt;
  Json parsed = Json::parse(text.substr(first, last - first + 1), nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;

  std::vector<Subtask> out;
  int fallback_id = 1;
  for (const auto& node : parsed) {
    if (!node.is_object()) return std::nullopt;
    Subtask s;
    s.id = node.value("id", fallback_id);
    fallback_id = s.id + 1;
    s.description = node.value("description", "");
    const Json& step = node.contains("step") && node["step"].is_object() ? node["step"] : node;
    auto kind = action_kind_from(step.value("action", ""));
    if (!kind) return std::nullopt;
    s.action.kind = *kind;
    s.action.item = step.value("item", "");
    s.action.amount = step.value("amount", 1);
    if (step.contains("pos") && step["pos"].is_array() && step["pos"].size() == 3) {
      s.action.pos = Vec3{step["pos"][0].get<int>(), step["pos"][1].get<int>(),
                          step["pos"][2].get<int>()};
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::vector<Subtask> decompose(const Goal& goal, const EnvSummary& env, Reasoner& reasoner) {
  if (!reasoner.deterministic()) {
    Json env_brief;
    env_brief["containers"] = Json::array();
    for (const auto& [pos, items] : env.containers) {
      Json c;
      c["pos"] = {pos.x, pos.y, pos.z};
      c["items"] = items;
      env_brief["containers"].push_back(c);
    }
    std::ostringstream prompt;
    prompt << "Decompose this goal into subtask nodes for Minecraft bots.\n"
           << "Goal (" << to_string(goal.kind) << "): " << goal.description << "\n"
           << "Environment: " << env_brief.dump() << "\n"
           << "Respond with a JSON array of nodes; the id of the step starts from 1. Each node: "
              "{\"id\": <int>, \"description\": <text>, \"step\": {\"action\": <one of "
              "navigate_to|check_container|withdraw_item|scan_entities|equip|place_block|"
              "handover|craft|smelt|mine_block|toggle|use_on|attack>, \"item\": <text>, "
              "\"pos\": [x,y,z], \"amount\": <int>}}";
    auto reply = reasoner.complete(prompt.str());
    if (reply) {
      if (auto nodes = parse_remote_nodes(*reply)) return *nodes;
    }
    throw Error(ErrorCode::DecompositionFailed, "remote reasoner yielded no parseable subtasks");
  }

  const RuleEngine* engine = reasoner.engine();
  static const RuleEngine fallback_engine;
  switch (goal.kind) {
    case GoalKind::Construction: return decompose_construction(goal, env);
    case GoalKind::Cooking: return decompose_cooking(goal, env);
    case GoalKind::Escape: return decompose_escape(goal);
    case GoalKind::ItemGathering:
      return decompose_gathering(goal, env, engine ? *engine : fallback_engine);
  }
  throw Error(ErrorCode::DecompositionFailed, "unknown goal kind");
}

TaskGraph build_initial_graph(const std::vector<Subtask>& subtasks, const RuleSet& rules,
                              Reasoner& reasoner, int samples) {
  TaskGraph graph;
  for (const auto& s : subtasks) graph.add_node(s);

  struct Candidate {
    int from;
    int to;
    EdgeProvenance provenance;
  };
  std::vector<Candidate> candidates;
  int n = samples > 0 ? samples : reasoner.default_samples();
  const auto& nodes = graph.nodes();
  for (auto p = nodes.begin(); p != nodes.end(); ++p) {
    for (auto q = std::next(p); q != nodes.end(); ++q) {
      DependencyQuery query{no_intervention(rules), p->second, q->second, n};
      VerdictDistribution dist = reasoner.query(query);
      if (dist.p_edge_pq > 0.5) {
        candidates.push_back({p->first, q->first, {dist.supporting_rules, false}});
      } else if (dist.p_edge_qp > 0.5) {
        candidates.push_back({q->first, p->first, {dist.supporting_rules, false}});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  for (auto& c : candidates) graph.add_edge(c.from, c.to, std::move(c.provenance));
  return graph;
}

double ate_for_rule(int rule_index, const Subtask& from, const Subtask& to, const RuleSet& rules,
                    Reasoner& reasoner, int samples) {
  int n = samples > 0 ? samples : reasoner.default_samples();
  DependencyQuery base{no_intervention(rules), from, to, n};
  DependencyQuery flipped{intervene(rules, rule_index), from, to, n};
  // Outcome variable: mass the reasoner puts on the direction the initial
  // graph recorded for this pair.
  return reasoner.query(base).p_edge_pq - reasoner.query(flipped).p_edge_pq;
}

std::pair<TaskGraph, std::vector<ATEResult>> refine_graph(const TaskGraph& g_init,
                                                          const RuleSet& rules, Reasoner& reasoner,
                                                          const PlannerConfig& config) {
  double epsilon = config.epsilon.value_or(reasoner.deterministic() ? 0.0 : 0.1);
  TaskGraph refined = g_init;
  std::vector<ATEResult> ledger;
  for (const auto& [edge, _] : g_init.edges()) {
    ATEResult result;
    result.from = edge.first;
    result.to = edge.second;
    for (std::size_t i = 1; i <= rules.size(); ++i) {
      result.per_rule.push_back(ate_for_rule(static_cast<int>(i), g_init.node(edge.first),
                                             g_init.node(edge.second), rules, reasoner,
                                             config.samples));
    }
    result.aggregate = result.per_rule.empty()
                           ? 0.0
                           : std::accumulate(result.per_rule.begin(), result.per_rule.end(), 0.0) /
                                 static_cast<double>(result.per_rule.size());
    if (config.prune_mode == PruneMode::AnyRule) {
      result.kept = std::any_of(result.per_rule.begin(), result.per_rule.end(),
                                [&](double v) { return std::abs(v) > epsilon; });
    } else {
      result.kept = std::abs(result.aggregate) > epsilon;
    }
    if (!result.kept) refined.remove_edge(edge.first, edge.second);
    ledger.push_back(std::move(result));
  }
  return {std::move(refined), std::move(ledger)};
}

}  // namespace causeway
