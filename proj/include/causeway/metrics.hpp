#pragma once

#include <string>
#include <vector>

#include "causeway/goal.hpp"
#include "causeway/world.hpp"

namespace causeway {

// Completed over total indicators. Throws ZeroIndicators when total is zero.
double completion_rate(int completed, int total);

struct ConstructionEval {
  int matched = 0;
  int total = 0;
  double rate = 0.0;
  std::vector<Vec3> mismatched;  // blueprint cells that are absent or wrong
};

// Blueprint cells correctly realized in the world; orientation counts only
// when the blueprint block pins a facing. Throws EmptyBlueprint.
ConstructionEval construction_completion(const World& world,
                                         const std::vector<BlueprintBlock>& blueprint);

// The six axis-aligned orthographic directions.
std::vector<Vec3> default_views();

// Mean over views of IoU between the world's and the blueprint's first-hit
// (cell, kind) sets inside the blueprint bounding box. Throws EmptyBlueprint
// and NoViewpoints.
double view_hit_rate(const World& world, const std::vector<BlueprintBlock>& blueprint,
                     const std::vector<Vec3>& views = default_views());

// Completion per minute of summed agent working time. Throws ZeroTime when
// the total time is not positive.
double efficiency(double completion, const std::vector<double>& agent_minutes);

// One minus the population standard deviation of normalized last-completion
// times u_j = (t_j - min) / (budget - min). All-equal timings score 1.
double balance_score(const std::vector<double>& last_completion_ticks, double budget_ticks);

// One minus sigma(counts) / sigma_max with sigma_max = total * sqrt(n-1) / n,
// the deviation of the most lopsided allocation. Throws DegenerateDenominator
// when fewer than two agents or nothing was completed.
double allocation_balance(const std::vector<int>& completed_counts);

struct RoomOutcome {
  std::string name;
  int conditions_met = 0;
  int conditions_total = 0;
  double score = 1.0;
};

// Score-weighted mean of per-room condition ratios. Throws EmptyRooms and
// ZeroTotal (when scores sum to zero). Rooms without conditions count as met.
double escape_rate(const std::vector<RoomOutcome>& rooms);

struct WeightedFlag {
  std::string name;
  double weight = 1.0;
  bool done = false;
};

// Weight-normalized share of latched progress flags. Throws EmptyRecipe and
// ZeroTotal.
double cooking_rate(const std::vector<WeightedFlag>& flags);

// Successful episodes over attempted episodes. Throws ZeroAttempts.
double success_rate(int successes, int episodes);

}  // namespace causeway
