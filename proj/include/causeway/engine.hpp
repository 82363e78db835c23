#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "causeway/agent.hpp"
#include "causeway/planner.hpp"
#include "causeway/scenario.hpp"
#include "causeway/scheduler.hpp"

namespace causeway {

enum class EndReason { AllPathsFinished, BudgetExceeded, NoOpenPaths };

const char* to_string(EndReason reason);

struct EngineConfig {
  std::uint64_t seed = 0;
  int agent_count = 0;    // 0: use every spawn the scenario defines
  std::string out_dir;    // artifact directory; empty keeps results in memory
  bool causal_refine = true;        // off: execute the unpruned initial graph
  bool busy_rate_assignment = true;  // off: uniform random path choice
  bool use_graph = true;  // off: singleton paths, no gating, no refinement
  int stall_ticks = 12;   // waiting this long with a quiet world forces reassignment
  std::string policy = "scripted";  // or "remote"
  PlannerConfig planner;
};

struct AgentReport {
  int completed = 0;
  int actions = 0;
  int failures = 0;
  double last_completion_tick = 0.0;
};

struct RunResult {
  std::string scenario;
  std::uint64_t seed = 0;
  int ticks = 0;
  EndReason end_reason = EndReason::BudgetExceeded;
  bool success = false;
  int completed_subtasks = 0;
  int total_subtasks = 0;
  TaskGraph g_init;
  TaskGraph g_refined;
  std::vector<ATEResult> ate;
  std::map<std::string, double> metrics;
  std::map<int, AgentReport> agents;
  std::vector<std::uint64_t> tick_hashes;  // world hash after each tick
  std::vector<std::string> log;
};

nlohmann::ordered_json graph_to_json(const TaskGraph& graph);

// Plans, schedules, and executes one scenario episode end to end, then
// scores it. With out_dir set it also writes g_init.json, g_refined.json,
// ate_ledger.json, metrics.json, metrics.csv, and trace.ndjson.
class Engine {
 public:
  // Without an external reasoner a rule-grounded one is built from the
  // default recipe, loot, and use tables.
  Engine(Scenario scenario, EngineConfig config, Reasoner* reasoner = nullptr);

  RunResult run();

 private:
  Scenario scenario_;
  EngineConfig config_;
  std::unique_ptr<Reasoner> owned_reasoner_;
  Reasoner* reasoner_;
};

RunResult run_scenario(const Scenario& scenario, const EngineConfig& config,
                       Reasoner* reasoner = nullptr);

// The full pipeline against its three ablations, same seed: "full",
// "no_causal", "no_busy_rate", "no_graph".
std::map<std::string, RunResult> run_ablations(const Scenario& scenario,
                                               const EngineConfig& config);

struct ReplayReport {
  int ticks_checked = 0;
  std::string scenario;
};

// Re-executes the episode a trace file records and verifies the world hash
// tick by tick. Throws TraceCorrupt for unreadable traces and
// DivergenceDetected when the re-run leaves the recorded trajectory.
ReplayReport replay_trace(const std::string& trace_path, const Scenario& scenario);

}  // namespace causeway
