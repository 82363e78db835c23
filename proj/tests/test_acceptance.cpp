// Acceptance gate: one pass/fail line per release criterion, nonzero exit
// when any of them fails. Runs entirely offline.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "causeway/common.hpp"
#include "causeway/engine.hpp"
#include "causeway/metrics.hpp"
#include "causeway/planner.hpp"
#include "causeway/reasoner.hpp"
#include "causeway/scenario.hpp"
#include "causeway/scheduler.hpp"
#include "causeway/world.hpp"

#include "oracles.hpp"

using namespace causeway;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string fmt_seconds(double s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << s << "s";
  return os.str();
}

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " " << index << " " << name;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << std::endl;
  if (!ok) ++g_failures;
}

// Subtask sets the builtin rules can ground, mirroring the randomized
// planner test generator.
std::vector<Subtask> random_rule_tasks(Rng& rng) {
  static const std::vector<std::string> items = {"stone", "brick", "log"};
  std::vector<Subtask> subtasks;
  int n = rng.range(2, 8);
  for (int i = 1; i <= n; ++i) {
    Subtask s;
    s.id = i;
    s.description = "task " + std::to_string(i);
    switch (rng.range(0, 4)) {
      case 0:
        s.action.kind = ActionKind::WithdrawItem;
        s.action.item = items[static_cast<std::size_t>(rng.range(0, 2))];
        s.action.container = Vec3{0, 1, 0};
        break;
      case 1:
        s.action.kind = ActionKind::PlaceBlock;
        s.action.item = items[static_cast<std::size_t>(rng.range(0, 1))];
        s.action.pos = Vec3{rng.range(0, 1) * 3, rng.range(1, 3), 0};
        break;
      case 2:
        s.action.kind = ActionKind::Equip;
        s.action.item = items[static_cast<std::size_t>(rng.range(0, 2))];
        break;
      case 3:
        s.action.kind = ActionKind::Craft;
        s.action.item = "planks";
        break;
      case 4:
        s.action.kind = ActionKind::MineBlock;
        s.action.item = "log";
        s.action.pos = Vec3{5, 1, 5};
        break;
    }
    subtasks.push_back(std::move(s));
  }
  return subtasks;
}

// Adds up to `want` forward edges no rule asserts; returns what was placed.
std::set<std::pair<int, int>> inject_rule_free_edges(TaskGraph& graph,
                                                     const std::vector<Subtask>& subtasks,
                                                     Rng& rng, int want) {
  std::set<std::pair<int, int>> placed;
  int n = static_cast<int>(subtasks.size());
  for (int attempt = 0; attempt < 200 && static_cast<int>(placed.size()) < want; ++attempt) {
    int i = rng.range(0, n - 1);
    int j = rng.range(0, n - 1);
    if (i == j) continue;
    const Subtask& a = subtasks[static_cast<std::size_t>(i)];
    const Subtask& b = subtasks[static_cast<std::size_t>(j)];
    if (oracle::asserting_rule(a, b) != 0) continue;
    if (graph.has_edge(a.id, b.id)) continue;
    if (graph.add_edge(a.id, b.id) == TaskGraph::EdgeOutcome::Added) placed.insert({a.id, b.id});
  }
  return placed;
}

void check_ate_pruning_and_algebra() {
  Timer timer;
  Rng rng(101);
  RuleReasoner reasoner;
  RuleSet rules = builtin_rules();

  int graphs = 0;
  int edges_checked = 0;
  int prune_mismatches = 0;
  int algebra_violations = 0;

  for (int trial = 0; trial < 200; ++trial) {
    auto subtasks = random_rule_tasks(rng);
    TaskGraph graph = build_initial_graph(subtasks, rules, reasoner);

    std::set<std::pair<int, int>> clean;
    for (const auto& [edge, provenance] : graph.edges()) clean.insert(edge);
    if (clean != oracle::expected_edges(subtasks)) ++prune_mismatches;

    auto spurious = inject_rule_free_edges(graph, subtasks, rng, rng.range(0, 4));

    auto [refined, ledger] = refine_graph(graph, rules, reasoner);
    std::set<std::pair<int, int>> kept;
    for (const auto& [edge, provenance] : refined.edges()) kept.insert(edge);
    if (kept != clean) ++prune_mismatches;

    std::map<int, const Subtask*> by_id;
    for (const auto& s : subtasks) by_id[s.id] = &s;
    for (const auto& entry : ledger) {
      ++edges_checked;
      double sum = 0.0;
      for (double v : entry.per_rule) sum += v;
      double mean = sum / static_cast<double>(entry.per_rule.size());
      if (std::abs(entry.aggregate - mean) > 1e-12) ++algebra_violations;

      int covering = oracle::asserting_rule(*by_id.at(entry.from), *by_id.at(entry.to));
      for (std::size_t i = 0; i < entry.per_rule.size(); ++i) {
        double expected = static_cast<int>(i) + 1 == covering ? 1.0 : 0.0;
        if (entry.per_rule[i] != expected) ++algebra_violations;
      }
      bool should_keep = spurious.count({entry.from, entry.to}) == 0;
      if (entry.kept != should_keep) ++prune_mismatches;
    }
    ++graphs;
  }

  double elapsed = timer.seconds();
  {
    std::ostringstream os;
    os << graphs << " graphs, " << prune_mismatches << " mismatches, " << fmt_seconds(elapsed);
    report(1, "causal pruning removes exactly the rule-free edges",
           prune_mismatches == 0 && elapsed < 10.0, os.str());
  }
  {
    std::ostringstream os;
    os << edges_checked << " ledger entries, " << algebra_violations << " violations";
    report(2, "per-rule effects are exact and average to the aggregate", algebra_violations == 0,
           os.str());
  }
}

void check_scheduler_invariants() {
  Timer timer;
  Rng rng(20250815);
  int episodes = 0;
  int argmin_violations = 0;
  int increment_violations = 0;
  int early_issue_violations = 0;
  int alldone_violations = 0;

  for (int episode = 0; episode < 1000; ++episode) {
    TaskGraph g = oracle::random_dag(rng, 9, 250);
    Scheduler::Config config;
    config.seed = rng.next();
    Scheduler sched(g, config);
    int agents = rng.range(1, 4);
    bool with_failures = rng.chance(0.3);
    std::map<int, int> waits;

    for (int tick = 0; tick < 2000 && !sched.finished(); ++tick) {
      for (int agent = 0; agent < agents; ++agent) {
        if (!sched.has_assignment(agent)) {
          double best = 1e18;
          int best_id = -1;
          for (const auto& path : sched.paths()) {
            if (path.status != PathStatus::Open) continue;
            double br = sched.busy_rate(path.id);
            if (br < best - 1e-12) {
              best = br;
              best_id = path.id;
            }
          }
          if (best_id < 0) continue;
          double before = sched.busy_rate(best_id);
          int picked = sched.assign(agent);
          if (picked != best_id) ++argmin_violations;
          if (std::abs(sched.busy_rate(picked) - (before + 1.0)) > 1e-12) ++increment_violations;
        }
        auto poll = sched.poll(agent);
        if (poll.status == Scheduler::PollStatus::Wait) {
          if (++waits[agent] >= 4 && sched.has_assignment(agent)) {
            waits[agent] = 0;
            try {
              sched.reassign(agent, sched.assigned_path(agent));
            } catch (const Error&) {
              sched.release(agent);
            }
          }
          continue;
        }
        waits[agent] = 0;
        if (poll.status != Scheduler::PollStatus::Issue) continue;
        for (int pred : g.predecessors(poll.subtask_id)) {
          if (!sched.subtask_completed(pred)) ++early_issue_violations;
        }
        if (with_failures && rng.chance(0.2)) {
          sched.report_failure(agent, poll.subtask_id);
        } else {
          sched.report_success(agent, poll.subtask_id);
        }
      }
    }

    bool all_complete = sched.finished();
    for (const auto& path : sched.paths()) {
      if (path.status != PathStatus::Complete) all_complete = false;
    }
    if (all_complete && sched.completed().size() != g.nodes().size()) ++alldone_violations;
    ++episodes;
  }

  std::ostringstream os;
  os << episodes << " episodes, " << argmin_violations << "/" << increment_violations << "/"
     << early_issue_violations << "/" << alldone_violations
     << " argmin/increment/gating/alldone violations, " << fmt_seconds(timer.seconds());
  report(3, "scheduler assignment invariants hold",
         argmin_violations == 0 && increment_violations == 0 && early_issue_violations == 0 &&
             alldone_violations == 0,
         os.str());
}

void check_path_coverage() {
  Rng rng(77);
  int trials = 0;
  int violations = 0;

  for (int trial = 0; trial < 200; ++trial) {
    TaskGraph g = oracle::random_dag(rng, 12, rng.range(50, 400));
    auto paths = enumerate_paths(g);

    std::set<int> covered;
    for (const auto& path : paths) covered.insert(path.subtask_ids.begin(), path.subtask_ids.end());
    std::set<int> nodes;
    for (const auto& [id, node] : g.nodes()) nodes.insert(id);
    if (covered != nodes) ++violations;

    auto reference = oracle::all_paths(g);
    if (paths.size() < 10000) {
      std::set<std::vector<int>> lib;
      for (const auto& path : paths) lib.insert(path.subtask_ids);
      std::set<std::vector<int>> ref(reference.begin(), reference.end());
      if (lib != ref) ++violations;
    }
    ++trials;
  }

  std::ostringstream os;
  os << trials << " graphs, " << violations << " violations";
  report(4, "enumerated paths cover every node and match brute force", violations == 0, os.str());
}

void check_world_determinism() {
  Timer timer;
  Rng seeds(90210);
  int runs = 0;
  int violations = 0;

  auto build = [] {
    World w;
    w.fill_blocks({-6, 0, -6}, {6, 0, 6}, "dirt");
    w.add_agent(0, {0, 1, 0});
    w.add_agent(1, {2, 1, 2});
    w.add_container({4, 1, 0}, {{"log", 8}, {"stone", 8}, {"wheat", 6}});
    w.set_block({-3, 1, 0}, "crafting_table");
    w.add_entity("cow", {0, 1, -4});
    w.reset_audit();
    return w;
  };

  auto random_spec = [](Rng& rng) {
    ActionSpec spec;
    switch (rng.range(0, 7)) {
      case 0:
        spec.kind = ActionKind::NavigateTo;
        spec.pos = Vec3{rng.range(-5, 5), 1, rng.range(-5, 5)};
        break;
      case 1:
        spec.kind = ActionKind::WithdrawItem;
        spec.container = Vec3{4, 1, 0};
        spec.item = rng.chance(0.5) ? "log" : "stone";
        spec.amount = rng.range(1, 3);
        break;
      case 2:
        spec.kind = ActionKind::Equip;
        spec.item = rng.chance(0.5) ? "stone" : "log";
        break;
      case 3:
        spec.kind = ActionKind::PlaceBlock;
        spec.item = "stone";
        spec.pos = Vec3{rng.range(0, 4), 1, 3};
        break;
      case 4:
        spec.kind = ActionKind::Craft;
        spec.item = rng.chance(0.5) ? "planks" : "bread";
        break;
      case 5:
        spec.kind = ActionKind::MineBlock;
        spec.pos = Vec3{rng.range(0, 4), 1, 3};
        break;
      case 6:
        spec.kind = ActionKind::Attack;
        spec.item = "cow";
        break;
      default:
        spec.kind = ActionKind::ScanEntities;
        break;
    }
    return spec;
  };

  for (int run = 0; run < 100; ++run) {
    std::uint64_t seed = seeds.next();
    std::vector<std::uint64_t> hashes;
    hashes.reserve(1000);

    World first = build();
    {
      Rng rng(seed);
      for (int i = 0; i < 1000; ++i) {
        first.apply(rng.range(0, 1), random_spec(rng));
        if (!first.audit_clean()) ++violations;
        hashes.push_back(first.state_hash());
      }
    }

    World second = build();
    {
      Rng rng(seed);
      for (int i = 0; i < 1000; ++i) {
        second.apply(rng.range(0, 1), random_spec(rng));
        if (second.state_hash() != hashes[static_cast<std::size_t>(i)]) ++violations;
      }
    }
    ++runs;
  }

  std::ostringstream os;
  os << runs << " runs of 1000 actions, " << violations << " violations, "
     << fmt_seconds(timer.seconds());
  report(5, "world fuzzing replays bit-exactly with a clean audit", violations == 0, os.str());
}

void check_metric_kernels() {
  int violations = 0;
  auto expect = [&](double actual, double expected) {
    if (std::abs(actual - expected) > 1e-9) ++violations;
  };

  expect(completion_rate(3, 4), 0.75);
  expect(success_rate(1, 2), 0.5);
  expect(balance_score({0.0, 120.0}, 120.0), 0.5);
  expect(balance_score({30.0, 30.0}, 100.0), 1.0);
  expect(allocation_balance({3, 1}), 0.5);
  expect(allocation_balance({2, 2}), 1.0);
  expect(efficiency(1.0, {4.0, 6.0}), 0.10);
  expect(escape_rate({{"switch room", 1, 1, 1.0}, {"exit hall", 0, 1, 3.0}}), 0.25);
  expect(cooking_rate({{"wheat", 1.0, true},
                       {"milk", 1.0, true},
                       {"egg", 1.0, false},
                       {"cake", 2.0, false}}),
         0.4);

  {
    std::vector<BlueprintBlock> column{{{0, 0, 0}, "stone", std::nullopt},
                                       {{0, 1, 0}, "stone", std::nullopt}};
    World w;
    w.set_block({0, 0, 0}, "stone");
    expect(view_hit_rate(w, column), 0.5);
    expect(construction_completion(w, column).rate, 0.5);
  }

  int off_oracle = 0;
  static const char* kKinds[3] = {"stone", "brick", "glass"};
  Rng rng(424242);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BlueprintBlock> blueprint;
    for (int x = 0; x < 5; ++x) {
      for (int y = 0; y < 5; ++y) {
        for (int z = 0; z < 5; ++z) {
          if (rng.chance(0.3)) {
            blueprint.push_back({{x, y, z}, kKinds[rng.range(0, 2)], std::nullopt});
          }
        }
      }
    }
    if (blueprint.empty()) blueprint.push_back({{0, 0, 0}, "stone", std::nullopt});

    World w;
    for (const auto& b : blueprint) {
      if (rng.chance(0.7)) w.set_block(b.pos, rng.chance(0.85) ? b.kind : "dirt");
    }
    for (int extra = 0; extra < 6; ++extra) {
      if (rng.chance(0.5)) {
        w.set_block({rng.range(0, 4), rng.range(0, 4), rng.range(0, 4)}, kKinds[rng.range(0, 2)]);
      }
    }
    if (std::abs(view_hit_rate(w, blueprint) - oracle::view_hit(w, blueprint)) > 1e-9) {
      ++off_oracle;
    }
  }

  std::ostringstream os;
  os << violations << " worked-example misses, " << off_oracle << "/50 rasterizer mismatches";
  report(6, "metric kernels match their worked examples and the rasterizer",
         violations == 0 && off_oracle == 0, os.str());
}

void check_end_to_end(const std::string& scenario_dir) {
  Timer timer;
  int runs = 0;
  int incomplete = 0;

  for (const char* name : {"tower", "cooking", "escape"}) {
    Scenario scenario = load_scenario(scenario_dir + "/" + name + std::string(".json"));
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      EngineConfig config;
      config.seed = seed;
      RunResult result = run_scenario(scenario, config);
      if (result.metrics.at("completion") != 1.0) ++incomplete;
      ++runs;
    }
  }

  double elapsed = timer.seconds();
  std::ostringstream os;
  os << runs << " runs, " << incomplete << " below full completion, " << fmt_seconds(elapsed);
  report(7, "bundled scenarios complete on every seed", incomplete == 0 && elapsed < 60.0,
         os.str());
}

void check_ablation_ordering(const std::string& scenario_dir) {
  Timer timer;
  Scenario scenario = load_scenario(scenario_dir + "/ablation.json");

  std::map<std::string, double> completion_sum;
  std::map<std::string, double> efficiency_sum;
  int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    EngineConfig config;
    config.seed = static_cast<std::uint64_t>(seed);
    auto results = run_ablations(scenario, config);
    for (const auto& [arm, result] : results) {
      completion_sum[arm] += result.metrics.at("completion");
      efficiency_sum[arm] += result.metrics.at("efficiency");
    }
  }

  auto mean_completion = [&](const std::string& arm) { return completion_sum.at(arm) / seeds; };
  auto mean_efficiency = [&](const std::string& arm) { return efficiency_sum.at(arm) / seeds; };

  bool ok = mean_completion("full") >= mean_completion("no_causal") &&
            mean_completion("full") >= mean_completion("no_graph") &&
            mean_efficiency("full") >= mean_efficiency("no_busy_rate");

  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << "CR full/no_causal/no_graph "
     << mean_completion("full") << "/" << mean_completion("no_causal") << "/"
     << mean_completion("no_graph") << ", Eff full/no_busy_rate " << mean_efficiency("full") << "/"
     << mean_efficiency("no_busy_rate") << ", " << fmt_seconds(timer.seconds());
  report(8, "full pipeline dominates each ablation on its target metric", ok, os.str());
}

void check_remote_isolation(const std::string& scenario_dir) {
  bool env_clear = std::getenv("REASONER_ENDPOINT") == nullptr;
  bool factory_null = remote_reasoner_from_env() == nullptr;

  EngineConfig config;
  config.seed = 7;
  RunResult result = run_scenario(load_scenario(scenario_dir + "/gathering.json"), config);
  bool local_ok = result.success;

  std::ostringstream os;
  os << "endpoint unset: " << (env_clear ? "yes" : "no") << ", factory null: "
     << (factory_null ? "yes" : "no") << ", offline run " << (local_ok ? "succeeded" : "failed");
  report(9, "everything runs with no remote endpoint configured",
         env_clear && factory_null && local_ok, os.str());
}

}  // namespace

int main() {
  unsetenv("REASONER_ENDPOINT");
  unsetenv("REASONER_API_KEY");
  std::string scenario_dir = CAUSEWAY_SCENARIO_DIR;

  try {
    check_ate_pruning_and_algebra();
    check_scheduler_invariants();
    check_path_coverage();
    check_world_determinism();
    check_metric_kernels();
    check_end_to_end(scenario_dir);
    check_ablation_ordering(scenario_dir);
    check_remote_isolation(scenario_dir);
  } catch (const std::exception& e) {
    std::cout << "FAIL - unexpected exception: " << e.what() << std::endl;
    return 2;
  }

  if (g_failures > 0) {
    std::cout << g_failures << " criteria failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
