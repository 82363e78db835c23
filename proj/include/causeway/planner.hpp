#pragma once

#include <utility>
#include <vector>

#include "causeway/goal.hpp"
#include "causeway/reasoner.hpp"
#include "causeway/task.hpp"

namespace causeway {

struct ATEResult {
  int from = 0;
  int to = 0;
  std::vector<double> per_rule;  // index i is rule i+1 in ruleset order
  double aggregate = 0.0;
  bool kept = false;
};

enum class PruneMode {
  Aggregate,  // prune when |mean effect| <= epsilon
  AnyRule,    // keep when any single |effect| > epsilon
};

struct PlannerConfig {
  std::optional<double> epsilon;  // default: 0 deterministic, 0.1 sampled
  PruneMode prune_mode = PruneMode::Aggregate;
  int samples = 0;  // 0: reasoner default
};

// Goal -> flat subtask list, ids assigned in emission order starting at 1.
// Template-driven for the rule-grounded reasoner; remote reasoners are asked
// for a node list and their reply parsed. Throws DecompositionFailed.
std::vector<Subtask> decompose(const Goal& goal, const EnvSummary& env, Reasoner& reasoner);

// Queries every unordered pair and keeps directions whose probability
// exceeds 0.5. Edge insertion runs in ascending (from, to) order so cycle
// rejections are deterministic.
TaskGraph build_initial_graph(const std::vector<Subtask>& subtasks, const RuleSet& rules,
                              Reasoner& reasoner, int samples = 0);

// Average treatment effect of one rule on the directed dependency from ->
// to: probability mass on that direction under the untouched ruleset minus
// the mass under the rule's counterfactual replacement.
double ate_for_rule(int rule_index, const Subtask& from, const Subtask& to, const RuleSet& rules,
                    Reasoner& reasoner, int samples = 0);

// Per-edge intervention sweep; removes edges whose effect clears the prune
// threshold and returns the refined graph plus the full effect ledger.
std::pair<TaskGraph, std::vector<ATEResult>> refine_graph(const TaskGraph& g_init,
                                                          const RuleSet& rules, Reasoner& reasoner,
                                                          const PlannerConfig& config = {});

}  // namespace causeway
