#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "causeway/engine.hpp"

namespace {

using namespace causeway;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ScenarioInvalid:
    case ErrorCode::TraceCorrupt:
    case ErrorCode::DivergenceDetected:
      return 2;
    default:
      return 1;
  }
}

struct CommonOpts {
  std::string scenario_path;
  std::uint64_t seed = 0;
  int agents = 0;
  std::string out_dir = "out";
  std::string policy = "scripted";
  bool no_causal = false;
  bool no_busy_rate = false;
  bool no_graph = false;
  int stall_ticks = 12;
  int samples = 0;
  double epsilon = -1.0;
  std::string prune_mode = "aggregate";
  std::string reasoner_endpoint;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_out = true) {
  cmd->add_option("--scenario", opts.scenario_path, "scenario JSON file")->required();
  cmd->add_option("--seed", opts.seed, "run seed");
  cmd->add_option("--agents", opts.agents, "cap on participating agents (0: all spawns)");
  if (with_out) cmd->add_option("--out", opts.out_dir, "artifact directory");
  cmd->add_option("--policy", opts.policy, "scripted or remote")
      ->check(CLI::IsMember({"scripted", "remote"}));
  cmd->add_flag("--no-causal", opts.no_causal, "execute the unpruned initial graph");
  cmd->add_flag("--no-busy-rate", opts.no_busy_rate, "random path assignment");
  cmd->add_flag("--no-graph", opts.no_graph, "singleton paths, no dependency gating");
  cmd->add_option("--stall-ticks", opts.stall_ticks, "quiet waiting ticks before reassignment");
  cmd->add_option("--samples", opts.samples, "reasoner samples per dependency query");
  cmd->add_option("--epsilon", opts.epsilon, "prune threshold (negative: reasoner default)");
  cmd->add_option("--prune-mode", opts.prune_mode, "aggregate or any-rule")
      ->check(CLI::IsMember({"aggregate", "any-rule"}));
  cmd->add_option("--reasoner-endpoint", opts.reasoner_endpoint,
                  "chat-completion endpoint; overrides REASONER_ENDPOINT");
}

EngineConfig make_config(const CommonOpts& opts) {
  EngineConfig config;
  config.seed = opts.seed;
  config.agent_count = opts.agents;
  config.out_dir = opts.out_dir;
  config.causal_refine = !opts.no_causal;
  config.busy_rate_assignment = !opts.no_busy_rate;
  config.use_graph = !opts.no_graph;
  config.stall_ticks = opts.stall_ticks;
  config.policy = opts.policy;
  config.planner.samples = opts.samples;
  if (opts.epsilon >= 0.0) config.planner.epsilon = opts.epsilon;
  config.planner.prune_mode =
      opts.prune_mode == "any-rule" ? PruneMode::AnyRule : PruneMode::Aggregate;
  return config;
}

std::unique_ptr<Reasoner> make_reasoner(const CommonOpts& opts) {
  if (!opts.reasoner_endpoint.empty()) {
    RemoteReasonerConfig rc;
    rc.endpoint = opts.reasoner_endpoint;
    if (const char* key = std::getenv("REASONER_API_KEY")) rc.api_key = key;
    return std::make_unique<RemoteReasoner>(rc);
  }
  return remote_reasoner_from_env();
}

Scenario load_checked(const std::string& path) {
  Scenario scenario = load_scenario(path);
  auto problems = validate_scenario(scenario);
  if (!problems.empty()) {
    std::string joined;
    for (const auto& p : problems) joined += (joined.empty() ? "" : "; ") + p;
    throw Error(ErrorCode::ScenarioInvalid, joined);
  }
  return scenario;
}

void print_summary(const RunResult& result) {
  std::cout << result.scenario << " seed=" << result.seed << " ticks=" << result.ticks
            << " end=" << to_string(result.end_reason)
            << " subtasks=" << result.completed_subtasks << "/" << result.total_subtasks
            << "\n";
  for (const auto& [name, value] : result.metrics) {
    std::cout << "  " << name << " = " << value << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causeway: causal multi-agent task planning and execution"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario episode");
  add_common(run_cmd, run_opts);

  CommonOpts ablate_opts;
  CLI::App* ablate_cmd =
      app.add_subcommand("ablate", "run the full pipeline against its ablations");
  add_common(ablate_cmd, ablate_opts);

  std::string replay_scenario;
  std::string trace_path;
  CLI::App* replay_cmd = app.add_subcommand("replay", "verify a recorded trace tick by tick");
  replay_cmd->add_option("--scenario", replay_scenario, "scenario JSON file")->required();
  replay_cmd->add_option("--trace", trace_path, "trace.ndjson to verify")->required();

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a scenario file");
  validate_cmd->add_option("--scenario", validate_path, "scenario JSON file")->required();

  CLI::App* rules_cmd = app.add_subcommand("rules", "print the builtin ruleset");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      Scenario scenario = load_checked(run_opts.scenario_path);
      auto reasoner = make_reasoner(run_opts);
      RunResult result = run_scenario(scenario, make_config(run_opts), reasoner.get());
      print_summary(result);
      return result.success ? 0 : 1;
    }
    if (ablate_cmd->parsed()) {
      Scenario scenario = load_checked(ablate_opts.scenario_path);
      auto results = run_ablations(scenario, make_config(ablate_opts));
      for (const auto& [name, result] : results) {
        std::cout << "[" << name << "]\n";
        print_summary(result);
      }
      return 0;
    }
    if (replay_cmd->parsed()) {
      Scenario scenario = load_checked(replay_scenario);
      ReplayReport report = replay_trace(trace_path, scenario);
      std::cout << "replay ok: " << report.ticks_checked << " ticks matched for "
                << report.scenario << "\n";
      return 0;
    }
    if (validate_cmd->parsed()) {
      Scenario scenario = load_scenario(validate_path);
      auto problems = validate_scenario(scenario);
      if (problems.empty()) {
        std::cout << "ok: " << scenario.name << " (" << to_string(scenario.goal.kind) << ", "
                  << scenario.spawns.size() << " agents)\n";
        return 0;
      }
      for (const auto& p : problems) std::cout << "problem: " << p << "\n";
      return 2;
    }
    if (rules_cmd->parsed()) {
      for (const auto& rule : builtin_rules().rules) {
        std::cout << "R" << rule.id << ": " << rule.statement << "\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
