#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "causeway/goal.hpp"
#include "causeway/rules.hpp"
#include "causeway/world.hpp"

namespace causeway {

struct AgentSpawn {
  int id = 0;
  Vec3 pos{};
};

// A fully described episode: terrain, stocks, goal, rules, and budget.
// Loaded from versioned JSON; everything needed to rebuild a run bit for bit.
struct Scenario {
  struct Fill {
    Vec3 from{};
    Vec3 to{};
    std::string kind;
  };

  int version = 1;
  std::string name;
  std::string description;
  Goal goal;
  std::vector<AgentSpawn> spawns;
  int tick_budget = 600;

  WorldConfig world_config;
  std::vector<Fill> fills;
  std::vector<BlueprintBlock> blocks;  // prebuilt terrain beyond the fills
  std::vector<std::pair<Vec3, std::map<std::string, int>>> containers;
  std::vector<std::pair<Vec3, bool>> mechanisms;
  std::vector<std::pair<std::string, Vec3>> entities;

  RuleSet rules;
  // Spurious dependency edges mixed into the initial graph before causal
  // refinement; zero outside the ablation study.
  int injected_edge_count = 0;

  World build_world() const;
  EnvSummary env_summary() const;
};

// Both throw ScenarioInvalid with a message naming the offending field.
Scenario parse_scenario(const nlohmann::ordered_json& doc);
Scenario load_scenario(const std::string& path);

// Structural problems worth rejecting a scenario for; empty means usable.
std::vector<std::string> validate_scenario(const Scenario& scenario);

}  // namespace causeway
