#include "causeway/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace causeway {

double completion_rate(int completed, int total) {
  if (total <= 0) {
    throw Error(ErrorCode::ZeroIndicators, "completion rate needs at least one indicator");
  }
  return static_cast<double>(completed) / static_cast<double>(total);
}

ConstructionEval construction_completion(const World& world,
                                         const std::vector<BlueprintBlock>& blueprint) {
  if (blueprint.empty()) {
    throw Error(ErrorCode::EmptyBlueprint, "construction goal has no blocks");
  }
  ConstructionEval eval;
  eval.total = static_cast<int>(blueprint.size());
  for (const auto& want : blueprint) {
    auto got = world.block_at(want.pos);
    bool ok = got && got->kind == want.kind && (!want.facing || got->facing == want.facing);
    if (ok) {
      ++eval.matched;
    } else {
      eval.mismatched.push_back(want.pos);
    }
  }
  eval.rate = static_cast<double>(eval.matched) / static_cast<double>(eval.total);
  return eval;
}

std::vector<Vec3> default_views() {
  return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
}

namespace {

struct Box {
  Vec3 lo;
  Vec3 hi;
};

Box bounding_box(const std::vector<BlueprintBlock>& blueprint) {
  Box box{blueprint.front().pos, blueprint.front().pos};
  for (const auto& b : blueprint) {
    box.lo = {std::min(box.lo.x, b.pos.x), std::min(box.lo.y, b.pos.y),
              std::min(box.lo.z, b.pos.z)};
    box.hi = {std::max(box.hi.x, b.pos.x), std::max(box.hi.y, b.pos.y),
              std::max(box.hi.z, b.pos.z)};
  }
  return box;
}

int axis_of(const Vec3& dir) {
  if (dir.x != 0) return 0;
  if (dir.y != 0) return 1;
  return 2;
}

int component(const Vec3& v, int axis) {
  return axis == 0 ? v.x : axis == 1 ? v.y : v.z;
}

Vec3 with_component(Vec3 v, int axis, int value) {
  (axis == 0 ? v.x : axis == 1 ? v.y : v.z) = value;
  return v;
}

// First solid cell per ray column, scanning the box along `dir`.
std::set<std::pair<Vec3, std::string>> first_hits(const std::map<Vec3, std::string>& cells,
                                                  const Box& box, const Vec3& dir) {
  int axis = axis_of(dir);
  int from = component(dir, axis) > 0 ? component(box.lo, axis) : component(box.hi, axis);
  int to = component(dir, axis) > 0 ? component(box.hi, axis) : component(box.lo, axis);
  int step = component(dir, axis) > 0 ? 1 : -1;
  int axis_u = axis == 0 ? 1 : 0;
  int axis_v = axis == 2 ? 1 : 2;

  std::set<std::pair<Vec3, std::string>> hits;
  for (int u = component(box.lo, axis_u); u <= component(box.hi, axis_u); ++u) {
    for (int v = component(box.lo, axis_v); v <= component(box.hi, axis_v); ++v) {
      for (int w = from; w != to + step; w += step) {
        Vec3 cell = with_component(with_component(with_component(Vec3{}, axis, w), axis_u, u),
                                   axis_v, v);
        auto it = cells.find(cell);
        if (it != cells.end()) {
          hits.insert({cell, it->second});
          break;
        }
      }
    }
  }
  return hits;
}

}  // namespace

double view_hit_rate(const World& world, const std::vector<BlueprintBlock>& blueprint,
                     const std::vector<Vec3>& views) {
  if (blueprint.empty()) {
    throw Error(ErrorCode::EmptyBlueprint, "view hit rate needs a blueprint");
  }
  if (views.empty()) {
    throw Error(ErrorCode::NoViewpoints, "view hit rate needs at least one view");
  }
  Box box = bounding_box(blueprint);

  std::map<Vec3, std::string> want;
  for (const auto& b : blueprint) want[b.pos] = b.kind;
  std::map<Vec3, std::string> got;
  for (const auto& [pos, block] : world.blocks()) {
    if (pos.x < box.lo.x || pos.x > box.hi.x || pos.y < box.lo.y || pos.y > box.hi.y ||
        pos.z < box.lo.z || pos.z > box.hi.z) {
      continue;
    }
    got[pos] = block.kind;
  }

  double total = 0.0;
  for (const auto& dir : views) {
    auto want_hits = first_hits(want, box, dir);
    auto got_hits = first_hits(got, box, dir);
    std::set<std::pair<Vec3, std::string>> unite = want_hits;
    unite.insert(got_hits.begin(), got_hits.end());
    if (unite.empty()) {
      total += 1.0;  // nothing visible from this side in either set
      continue;
    }
    int common = 0;
    for (const auto& hit : want_hits) common += got_hits.count(hit) ? 1 : 0;
    total += static_cast<double>(common) / static_cast<double>(unite.size());
  }
  return total / static_cast<double>(views.size());
}

double efficiency(double completion, const std::vector<double>& agent_minutes) {
  double sum = 0.0;
  for (double m : agent_minutes) sum += m;
  if (sum <= 0.0) {
    throw Error(ErrorCode::ZeroTime, "efficiency needs positive working time");
  }
  return completion / sum;
}

double balance_score(const std::vector<double>& last_completion_ticks, double budget_ticks) {
  if (last_completion_ticks.empty()) {
    throw Error(ErrorCode::ZeroIndicators, "balance score needs at least one agent");
  }
  double lo = *std::min_element(last_completion_ticks.begin(), last_completion_ticks.end());
  double denom = budget_ticks - lo;
  if (denom <= 0.0) return 1.0;  // everyone finished at the budget edge together

  double mean = 0.0;
  std::vector<double> u;
  for (double t : last_completion_ticks) {
    u.push_back((std::min(t, budget_ticks) - lo) / denom);
    mean += u.back();
  }
  mean /= static_cast<double>(u.size());
  double var = 0.0;
  for (double x : u) var += (x - mean) * (x - mean);
  var /= static_cast<double>(u.size());
  return 1.0 - std::sqrt(var);
}

double allocation_balance(const std::vector<int>& completed_counts) {
  auto n = static_cast<double>(completed_counts.size());
  double total = 0.0;
  for (int c : completed_counts) total += static_cast<double>(c);
  if (completed_counts.size() < 2 || total <= 0.0) {
    throw Error(ErrorCode::DegenerateDenominator,
                "allocation balance needs two agents and completed work");
  }
  double mean = total / n;
  double var = 0.0;
  for (int c : completed_counts) var += (c - mean) * (c - mean);
  var /= n;
  double sigma_max = total * std::sqrt(n - 1.0) / n;
  return 1.0 - std::sqrt(var) / sigma_max;
}

double escape_rate(const std::vector<RoomOutcome>& rooms) {
  if (rooms.empty()) {
    throw Error(ErrorCode::EmptyRooms, "escape rate needs at least one room");
  }
  double score_sum = 0.0;
  double weighted = 0.0;
  for (const auto& room : rooms) {
    score_sum += room.score;
    double ratio = room.conditions_total > 0
                       ? static_cast<double>(room.conditions_met) /
                             static_cast<double>(room.conditions_total)
                       : 1.0;
    weighted += ratio * room.score;
  }
  if (score_sum <= 0.0) {
    throw Error(ErrorCode::ZeroTotal, "room scores sum to zero");
  }
  return weighted / score_sum;
}

double cooking_rate(const std::vector<WeightedFlag>& flags) {
  if (flags.empty()) {
    throw Error(ErrorCode::EmptyRecipe, "cooking rate needs progress flags");
  }
  double weight_sum = 0.0;
  double done = 0.0;
  for (const auto& flag : flags) {
    weight_sum += flag.weight;
    if (flag.done) done += flag.weight;
  }
  if (weight_sum <= 0.0) {
    throw Error(ErrorCode::ZeroTotal, "flag weights sum to zero");
  }
  return done / weight_sum;
}

double success_rate(int successes, int episodes) {
  if (episodes <= 0) {
    throw Error(ErrorCode::ZeroAttempts, "success rate needs at least one episode");
  }
  return static_cast<double>(successes) / static_cast<double>(episodes);
}

}  // namespace causeway
