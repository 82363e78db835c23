#include "causeway/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace causeway {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorCode::ScenarioInvalid, what);
}

Vec3 read_vec(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number_integer()) {
    bad(where + " must be an [x, y, z] triple");
  }
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

std::map<std::string, int> read_items(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must map item names to counts");
  std::map<std::string, int> items;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number_integer() || value.get<int>() < 0) {
      bad(where + "." + key + " must be a non-negative count");
    }
    items[key] = value.get<int>();
  }
  return items;
}

BlueprintBlock read_block(const Json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("pos") || !j.contains("kind")) {
    bad(where + " needs pos and kind");
  }
  BlueprintBlock block;
  block.pos = read_vec(j["pos"], where + ".pos");
  block.kind = j["kind"].get<std::string>();
  if (block.kind.empty()) bad(where + ".kind must not be empty");
  if (j.contains("facing")) block.facing = j["facing"].get<std::string>();
  return block;
}

void parse_world(const Json& w, Scenario& s) {
  if (w.contains("floor")) {
    const Json& f = w["floor"];
    if (!f.contains("from") || !f.contains("to") || !f.contains("kind")) {
      bad("world.floor needs from, to, kind");
    }
    s.fills.push_back(
        {read_vec(f["from"], "world.floor.from"), read_vec(f["to"], "world.floor.to"),
         f["kind"].get<std::string>()});
  }
  if (w.contains("fills")) {
    for (std::size_t i = 0; i < w["fills"].size(); ++i) {
      const Json& f = w["fills"][i];
      std::string where = "world.fills[" + std::to_string(i) + "]";
      if (!f.contains("from") || !f.contains("to") || !f.contains("kind")) {
        bad(where + " needs from, to, kind");
      }
      s.fills.push_back({read_vec(f["from"], where + ".from"), read_vec(f["to"], where + ".to"),
                         f["kind"].get<std::string>()});
    }
  }
  if (w.contains("blocks")) {
    for (std::size_t i = 0; i < w["blocks"].size(); ++i) {
      s.blocks.push_back(read_block(w["blocks"][i], "world.blocks[" + std::to_string(i) + "]"));
    }
  }
  if (w.contains("containers")) {
    for (std::size_t i = 0; i < w["containers"].size(); ++i) {
      const Json& c = w["containers"][i];
      std::string where = "world.containers[" + std::to_string(i) + "]";
      if (!c.contains("pos") || !c.contains("items")) bad(where + " needs pos and items");
      s.containers.push_back(
          {read_vec(c["pos"], where + ".pos"), read_items(c["items"], where + ".items")});
    }
  }
  if (w.contains("mechanisms")) {
    for (std::size_t i = 0; i < w["mechanisms"].size(); ++i) {
      const Json& m = w["mechanisms"][i];
      std::string where = "world.mechanisms[" + std::to_string(i) + "]";
      if (!m.contains("pos")) bad(where + " needs pos");
      s.mechanisms.push_back({read_vec(m["pos"], where + ".pos"), m.value("on", false)});
    }
  }
  if (w.contains("entities")) {
    for (std::size_t i = 0; i < w["entities"].size(); ++i) {
      const Json& e = w["entities"][i];
      std::string where = "world.entities[" + std::to_string(i) + "]";
      if (!e.contains("kind") || !e.contains("pos")) bad(where + " needs kind and pos");
      s.entities.push_back({e["kind"].get<std::string>(), read_vec(e["pos"], where + ".pos")});
    }
  }
  if (w.contains("reach")) s.world_config.reach = w["reach"].get<int>();
  if (w.contains("scan_radius")) s.world_config.scan_radius = w["scan_radius"].get<int>();
  if (w.contains("action_costs")) {
    for (const auto& [key, value] : w["action_costs"].items()) {
      auto kind = action_kind_from(key);
      if (!kind) bad("world.action_costs has unknown action '" + key + "'");
      if (!value.is_number_integer() || value.get<int>() < 0) {
        bad("world.action_costs." + key + " must be a non-negative integer");
      }
      s.world_config.action_costs[*kind] = value.get<int>();
    }
  }
}

void parse_goal(const Json& g, Scenario& s) {
  switch (s.goal.kind) {
    case GoalKind::Construction: {
      if (!g.contains("blueprint") || !g["blueprint"].is_array() || g["blueprint"].empty()) {
        bad("goal.blueprint must be a non-empty array for construction");
      }
      for (std::size_t i = 0; i < g["blueprint"].size(); ++i) {
        s.goal.blueprint.push_back(
            read_block(g["blueprint"][i], "goal.blueprint[" + std::to_string(i) + "]"));
      }
      break;
    }
    case GoalKind::Cooking: {
      if (!g.contains("recipe")) bad("goal.recipe is required for cooking");
      const Json& r = g["recipe"];
      for (std::size_t i = 0; i < r.value("ingredients", Json::array()).size(); ++i) {
        const Json& ing = r["ingredients"][i];
        std::string where = "goal.recipe.ingredients[" + std::to_string(i) + "]";
        if (!ing.contains("item")) bad(where + " needs item");
        Ingredient out;
        out.item = ing["item"].get<std::string>();
        out.amount = ing.value("amount", 1);
        out.score = ing.value("score", 1.0);
        if (ing.contains("source")) {
          const Json& src = ing["source"];
          IngredientSource source;
          std::string kind = src.value("kind", "container");
          if (kind == "container") {
            source.kind = SourceKind::Container;
          } else if (kind == "mine") {
            source.kind = SourceKind::Mine;
          } else if (kind == "hunt") {
            source.kind = SourceKind::Hunt;
          } else {
            bad(where + ".source.kind must be container, mine, or hunt");
          }
          if (src.contains("pos")) source.pos = read_vec(src["pos"], where + ".source.pos");
          source.entity = src.value("entity", "");
          out.source = source;
        }
        s.goal.recipe.ingredients.push_back(std::move(out));
      }
      for (std::size_t i = 0; i < r.value("steps", Json::array()).size(); ++i) {
        const Json& step = r["steps"][i];
        std::string where = "goal.recipe.steps[" + std::to_string(i) + "]";
        if (!step.contains("item")) bad(where + " needs item");
        RecipeStep out;
        std::string action = step.value("action", "craft");
        if (action == "craft") {
          out.kind = ActionKind::Craft;
        } else if (action == "smelt") {
          out.kind = ActionKind::Smelt;
        } else {
          bad(where + ".action must be craft or smelt");
        }
        out.item = step["item"].get<std::string>();
        out.amount = step.value("amount", 1);
        out.score = step.value("score", 1.0);
        out.fuel = step.value("fuel", "");
        s.goal.recipe.steps.push_back(std::move(out));
      }
      if (s.goal.recipe.ingredients.empty() && s.goal.recipe.steps.empty()) {
        bad("goal.recipe needs ingredients or steps");
      }
      break;
    }
    case GoalKind::Escape: {
      if (!g.contains("rooms") || !g["rooms"].is_array() || g["rooms"].empty()) {
        bad("goal.rooms must be a non-empty array for escape");
      }
      for (std::size_t i = 0; i < g["rooms"].size(); ++i) {
        const Json& room = g["rooms"][i];
        std::string where = "goal.rooms[" + std::to_string(i) + "]";
        Room out;
        out.name = room.value("name", "room " + std::to_string(i + 1));
        out.score = room.value("score", 1.0);
        if (!room.contains("conditions") || room["conditions"].empty()) {
          bad(where + " needs at least one condition");
        }
        for (std::size_t k = 0; k < room["conditions"].size(); ++k) {
          const Json& cond = room["conditions"][k];
          std::string cwhere = where + ".conditions[" + std::to_string(k) + "]";
          if (!cond.contains("pos")) bad(cwhere + " needs pos");
          out.conditions.push_back(
              {read_vec(cond["pos"], cwhere + ".pos"), cond.value("desired", true)});
        }
        s.goal.rooms.push_back(std::move(out));
      }
      break;
    }
    case GoalKind::ItemGathering: {
      if (!g.contains("target") || !g["target"].contains("item")) {
        bad("goal.target.item is required for item gathering");
      }
      s.goal.target.item = g["target"]["item"].get<std::string>();
      s.goal.target.amount = g["target"].value("amount", 1);
      if (s.goal.target.amount < 1) bad("goal.target.amount must be positive");
      break;
    }
  }
}

void parse_rules(const Json& r, Scenario& s) {
  bool include_builtin = r.value("include_builtin", true);
  if (include_builtin) s.rules = builtin_rules();
  if (!r.contains("extra")) return;
  for (std::size_t i = 0; i < r["extra"].size(); ++i) {
    const Json& e = r["extra"][i];
    std::string where = "rules.extra[" + std::to_string(i) + "]";
    Rule rule;
    rule.id = e.value("id", static_cast<int>(s.rules.size()) + 1);
    if (!e.contains("statement")) bad(where + " needs a statement");
    rule.statement = e["statement"].get<std::string>();
    rule.counterfactual_statement = e.value("counterfactual", rule.statement);
    std::string predicate = e.value("predicate", "");
    auto kind = predicate_kind_from(predicate);
    if (!kind) bad(where + ".predicate '" + predicate + "' is unknown");
    rule.predicate = *kind;
    if (e.contains("params")) {
      for (const auto& p : e["params"]) rule.params.push_back(p.get<std::string>());
    }
    s.rules.rules.push_back(std::move(rule));
  }
  if (!s.rules.ids_unique()) bad("rules carry duplicate ids");
}

}  // namespace

Scenario parse_scenario(const Json& doc) {
  if (!doc.is_object()) bad("scenario document must be a JSON object");
  Scenario s;
  s.version = doc.value("version", 0);
  if (s.version != 1) bad("unsupported scenario version " + std::to_string(s.version));
  s.name = doc.value("name", "");
  if (s.name.empty()) bad("scenario needs a name");
  s.description = doc.value("description", "");

  auto kind = goal_kind_from(doc.value("kind", ""));
  if (!kind) bad("scenario kind '" + doc.value("kind", "") + "' is unknown");
  s.goal.kind = *kind;
  s.goal.description = s.description.empty() ? s.name : s.description;

  if (!doc.contains("agents") || !doc["agents"].is_array() || doc["agents"].empty()) {
    bad("scenario needs a non-empty agents array");
  }
  std::set<int> seen_ids;
  for (std::size_t i = 0; i < doc["agents"].size(); ++i) {
    const Json& a = doc["agents"][i];
    std::string where = "agents[" + std::to_string(i) + "]";
    if (!a.contains("pos")) bad(where + " needs pos");
    AgentSpawn spawn{a.value("id", static_cast<int>(i)), read_vec(a["pos"], where + ".pos")};
    if (!seen_ids.insert(spawn.id).second) bad("duplicate agent id " + std::to_string(spawn.id));
    s.spawns.push_back(spawn);
  }

  s.tick_budget = doc.value("tick_budget", 600);
  if (s.tick_budget < 1) bad("tick_budget must be positive");

  if (doc.contains("world")) parse_world(doc["world"], s);
  if (!doc.contains("goal")) bad("scenario needs a goal section");
  parse_goal(doc["goal"], s);
  if (doc.contains("rules")) {
    parse_rules(doc["rules"], s);
  } else {
    s.rules = builtin_rules();
  }
  if (doc.contains("injected_edges")) {
    s.injected_edge_count = doc["injected_edges"].value("count", 0);
    if (s.injected_edge_count < 0) bad("injected_edges.count must be non-negative");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open scenario file " + path);
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) bad("scenario file " + path + " is not valid JSON");
  return parse_scenario(doc);
}

World Scenario::build_world() const {
  World world(world_config, default_recipes(), default_loot(), default_use_rules());
  for (const auto& fill : fills) world.fill_blocks(fill.from, fill.to, fill.kind);
  for (const auto& block : blocks) world.set_block(block.pos, block.kind, block.facing);
  for (const auto& [pos, items] : containers) world.add_container(pos, items);
  for (const auto& [pos, on] : mechanisms) world.add_mechanism(pos, on);
  for (const auto& [kind, pos] : entities) world.add_entity(kind, pos);
  for (const auto& spawn : spawns) world.add_agent(spawn.id, spawn.pos);
  world.reset_audit();
  return world;
}

EnvSummary Scenario::env_summary() const {
  EnvSummary env;
  for (const auto& [pos, items] : containers) env.containers[pos] = items;
  for (const auto& block : blocks) {
    if (block.kind == "crafting_table") env.crafting_tables.push_back(block.pos);
    if (block.kind == "furnace") env.furnaces.push_back(block.pos);
    env.blocks_by_kind[block.kind].push_back(block.pos);
  }
  for (const auto& fill : fills) {
    // Terrain fills are usually big slabs; summarize rather than enumerate.
    env.blocks_by_kind[fill.kind].push_back(fill.from);
  }
  for (const auto& [kind, pos] : entities) env.entities.push_back({kind, pos});
  return env;
}

std::vector<std::string> validate_scenario(const Scenario& scenario) {
  std::vector<std::string> problems;
  World world = scenario.build_world();
  for (const auto& spawn : scenario.spawns) {
    if (!world.walkable(spawn.pos)) {
      problems.push_back("agent " + std::to_string(spawn.id) + " spawn " + to_string(spawn.pos) +
                         " is not walkable");
    }
  }
  switch (scenario.goal.kind) {
    case GoalKind::Construction: {
      for (const auto& block : scenario.goal.blueprint) {
        if (world.block_at(block.pos)) {
          problems.push_back("blueprint cell " + to_string(block.pos) + " is already occupied");
        }
      }
      std::map<std::string, int> demand;
      for (const auto& block : scenario.goal.blueprint) ++demand[block.kind];
      for (const auto& [kind, count] : demand) {
        int stocked = 0;
        for (const auto& [pos, items] : scenario.containers) {
          auto it = items.find(kind);
          if (it != items.end()) stocked += it->second;
        }
        if (stocked < count) {
          problems.push_back("containers stock " + std::to_string(stocked) + " " + kind +
                             " but the blueprint needs " + std::to_string(count));
        }
      }
      break;
    }
    case GoalKind::Cooking: {
      for (const auto& step : scenario.goal.recipe.steps) {
        if (!default_recipes().count(step.item)) {
          problems.push_back("no recipe for step item " + step.item);
        }
      }
      break;
    }
    case GoalKind::Escape: {
      for (const auto& room : scenario.goal.rooms) {
        for (const auto& cond : room.conditions) {
          if (!world.mechanism_at(cond.pos)) {
            problems.push_back("room '" + room.name + "' references missing mechanism at " +
                               to_string(cond.pos));
          }
        }
      }
      break;
    }
    case GoalKind::ItemGathering:
      break;
  }
  return problems;
}

}  // namespace causeway
