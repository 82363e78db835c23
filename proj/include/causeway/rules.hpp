#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "causeway/task.hpp"

namespace causeway {

enum class Polarity { Normal, Counterfactual };
enum class Verdict { EdgePQ, EdgeQP, NoEdge, NotCovered };

const char* to_string(Verdict verdict);

struct RecipeEntry {
  std::map<std::string, int> ingredients;
  int output_count = 1;
  bool needs_table = false;
  bool needs_furnace = false;
  int fuel_per_unit = 0;
};

using RecipeBook = std::map<std::string, RecipeEntry>;

struct LootEntry {
  std::map<std::string, int> drops;
  std::string required_tool;  // empty: bare hands work
};

// Keyed by entity or block kind.
using LootTable = std::map<std::string, LootEntry>;

struct UseRule {
  std::string tool;
  std::string target;
  std::map<std::string, int> produces;
  bool consumes_tool = false;
};

using UseRules = std::vector<UseRule>;

RecipeBook default_recipes();
LootTable default_loot();
std::vector<UseRule> default_use_rules();

// A ruleset with at most one rule flipped to its counterfactual reading.
// replaced_index is 1-based; 0 means no intervention.
struct InterventionSet {
  RuleSet base;
  int replaced_index = 0;

  Polarity polarity_of(int index_1based) const {
    return index_1based == replaced_index ? Polarity::Counterfactual : Polarity::Normal;
  }
  std::size_t size() const { return base.size(); }
  const Rule& rule(int index_1based) const { return base.at(index_1based); }
};

InterventionSet no_intervention(RuleSet base);
InterventionSet intervene(RuleSet base, int index_1based);  // throws IndexOutOfRange

// The five stock game rules, ids 1..5.
RuleSet builtin_rules();

// Evaluates rule predicates against subtask pairs. Owns the recipe/loot
// context the craft-ingredient rule consults.
class RuleEngine {
 public:
  RuleEngine();
  RuleEngine(RecipeBook recipes, LootTable loot, std::vector<UseRule> use_rules);

  // Pure in its inputs: identical arguments always yield the same verdict.
  // Throws MalformedActionSpec when a deciding parameter is missing.
  Verdict evaluate(const Rule& rule, const Subtask& p, const Subtask& q, Polarity polarity) const;

  const RecipeBook& recipes() const { return recipes_; }
  const LootTable& loot() const { return loot_; }
  const std::vector<UseRule>& use_rules() const { return use_rules_; }

  // Items a subtask's action adds to the acting agent's possession.
  std::map<std::string, int> produced_items(const Subtask& s) const;

 private:
  Verdict normal_verdict(const Rule& rule, const Subtask& p, const Subtask& q) const;

  RecipeBook recipes_;
  LootTable loot_;
  std::vector<UseRule> use_rules_;
};

}  // namespace causeway
