#include "causeway/engine.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "causeway/metrics.hpp"

namespace causeway {

using Json = nlohmann::ordered_json;

const char* to_string(EndReason reason) {
  switch (reason) {
    case EndReason::AllPathsFinished: return "all_paths_finished";
    case EndReason::BudgetExceeded: return "budget_exceeded";
    case EndReason::NoOpenPaths: return "no_open_paths";
  }
  return "?";
}

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json action_to_json(const ActionSpec& a) {
  Json j;
  j["kind"] = to_string(a.kind);
  if (!a.item.empty()) j["item"] = a.item;
  if (a.pos) j["pos"] = vec_json(*a.pos);
  if (a.container) j["container"] = vec_json(*a.container);
  if (a.amount != 1) j["amount"] = a.amount;
  if (!a.fuel.empty()) j["fuel"] = a.fuel;
  if (!a.tool.empty()) j["tool"] = a.tool;
  if (a.target_agent >= 0) j["target_agent"] = a.target_agent;
  if (a.distance != 0) j["distance"] = a.distance;
  if (a.facing) j["facing"] = *a.facing;
  if (a.desired_state) j["state"] = *a.desired_state;
  if (!a.item_sources.empty()) {
    Json sources;
    for (const auto& [item, pos] : a.item_sources) sources[item] = vec_json(pos);
    j["item_sources"] = sources;
  }
  return j;
}

Json post_to_json(const Postcondition& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  if (p.kind == PostKind::None) return j;
  j["pos"] = vec_json(p.pos);
  if (!p.item.empty()) j["item"] = p.item;
  j["count"] = p.count;
  if (p.kind == PostKind::MechanismState) j["on"] = p.on;
  return j;
}

// Spurious dependencies a hallucinating planner might add: random forward
// pairs in topological order, so the graph stays acyclic, with no rule
// backing. Causal refinement is expected to remove every one of them.
int inject_spurious_edges(TaskGraph& graph, int count, std::uint64_t seed) {
  auto order = graph.topological_order();
  if (!order || order->size() < 2) return 0;
  Rng rng = Rng(seed).fork("hallucinate");
  int placed = 0;
  int attempts = 0;
  int n = static_cast<int>(order->size());
  while (placed < count && attempts < count * 20 + 20) {
    ++attempts;
    int i = rng.range(0, n - 2);
    int j = rng.range(i + 1, n - 1);
    int from = (*order)[static_cast<std::size_t>(i)];
    int to = (*order)[static_cast<std::size_t>(j)];
    if (graph.has_edge(from, to)) continue;
    if (graph.add_edge(from, to) == TaskGraph::EdgeOutcome::Added) ++placed;
  }
  return placed;
}

struct StallWatch {
  bool waiting = false;
  int since_tick = 0;
  std::uint64_t mutations = 0;
};

struct AgentRuntime {
  AgentMemory memory;
  StallWatch stall;
  int current_subtask = -1;
};

std::vector<WeightedFlag> cooking_flags(const Scenario& scenario, const Scheduler& scheduler) {
  // Decomposition assigns ids 1..n in order: one gather per ingredient, then
  // the craft and smelt steps.
  std::vector<WeightedFlag> flags;
  int id = 1;
  for (const auto& ing : scenario.goal.recipe.ingredients) {
    flags.push_back({"gather " + ing.item, ing.score, scheduler.subtask_completed(id)});
    ++id;
  }
  for (const auto& step : scenario.goal.recipe.steps) {
    flags.push_back({"make " + step.item, step.score, scheduler.subtask_completed(id)});
    ++id;
  }
  return flags;
}

double primary_completion(const Scenario& scenario, const World& world,
                          const Scheduler& scheduler, RunResult& out) {
  switch (scenario.goal.kind) {
    case GoalKind::Construction: {
      ConstructionEval eval = construction_completion(world, scenario.goal.blueprint);
      out.metrics["view_hit"] = view_hit_rate(world, scenario.goal.blueprint);
      return eval.rate;
    }
    case GoalKind::Cooking:
      return cooking_rate(cooking_flags(scenario, scheduler));
    case GoalKind::Escape: {
      std::vector<RoomOutcome> rooms;
      for (const auto& room : scenario.goal.rooms) {
        RoomOutcome outcome;
        outcome.name = room.name;
        outcome.score = room.score;
        outcome.conditions_total = static_cast<int>(room.conditions.size());
        for (const auto& cond : room.conditions) {
          auto state = world.mechanism_at(cond.pos);
          if (state && *state == cond.desired) ++outcome.conditions_met;
        }
        rooms.push_back(outcome);
      }
      return escape_rate(rooms);
    }
    case GoalKind::ItemGathering: {
      int held = 0;
      for (const auto& [id, agent] : world.agents()) {
        auto it = agent.inventory.find(scenario.goal.target.item);
        if (it != agent.inventory.end()) held += it->second;
      }
      int amount = scenario.goal.target.amount;
      return completion_rate(std::min(held, amount), amount);
    }
  }
  return 0.0;
}

void score_run(const Scenario& scenario, const World& world, const Scheduler& scheduler,
               const std::vector<int>& active_agents, RunResult& out) {
  out.completed_subtasks = static_cast<int>(scheduler.completed().size());
  out.total_subtasks = static_cast<int>(scheduler.graph().nodes().size());
  out.metrics["subtask_completion"] =
      completion_rate(out.completed_subtasks, out.total_subtasks);

  double completion = primary_completion(scenario, world, scheduler, out);
  out.metrics["completion"] = completion;
  out.success = completion >= 1.0 - 1e-9;
  out.metrics["success"] = out.success ? 1.0 : 0.0;

  std::vector<double> last_ticks;
  std::vector<double> minutes;
  std::vector<int> counts;
  for (int id : active_agents) {
    const AgentReport& rep = out.agents[id];
    last_ticks.push_back(std::min(rep.last_completion_tick, double(scenario.tick_budget)));
    minutes.push_back(last_ticks.back() / 60.0);
    counts.push_back(rep.completed);
  }
  out.metrics["balance"] = balance_score(last_ticks, double(scenario.tick_budget));
  double total_minutes = 0.0;
  for (double m : minutes) total_minutes += m;
  out.metrics["efficiency"] = total_minutes > 0.0 ? efficiency(completion, minutes) : 0.0;
  try {
    out.metrics["allocation_balance"] = allocation_balance(counts);
  } catch (const Error&) {
    // single agent or nothing done; the ratio is undefined, leave it out
  }
}

void write_artifacts(const std::string& out_dir, const RunResult& out) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  std::ofstream(out_dir + "/g_init.json") << graph_to_json(out.g_init).dump(2) << "\n";
  std::ofstream(out_dir + "/g_refined.json") << graph_to_json(out.g_refined).dump(2) << "\n";

  Json ate = Json::array();
  for (const auto& r : out.ate) {
    Json entry;
    entry["from"] = r.from;
    entry["to"] = r.to;
    entry["per_rule"] = r.per_rule;
    entry["aggregate"] = r.aggregate;
    entry["kept"] = r.kept;
    ate.push_back(entry);
  }
  std::ofstream(out_dir + "/ate_ledger.json") << ate.dump(2) << "\n";

  Json m;
  m["scenario"] = out.scenario;
  m["seed"] = out.seed;
  m["ticks"] = out.ticks;
  m["end_reason"] = to_string(out.end_reason);
  m["success"] = out.success;
  m["completed_subtasks"] = out.completed_subtasks;
  m["total_subtasks"] = out.total_subtasks;
  m["metrics"] = out.metrics;
  Json agents = Json::array();
  for (const auto& [id, rep] : out.agents) {
    Json a;
    a["id"] = id;
    a["completed"] = rep.completed;
    a["actions"] = rep.actions;
    a["failures"] = rep.failures;
    a["last_completion_tick"] = rep.last_completion_tick;
    agents.push_back(a);
  }
  m["agents"] = agents;
  std::ofstream(out_dir + "/metrics.json") << m.dump(2) << "\n";

  std::ostringstream header;
  std::ostringstream row;
  header << "scenario,seed,ticks,end_reason,success";
  row << out.scenario << "," << out.seed << "," << out.ticks << ","
      << to_string(out.end_reason) << "," << (out.success ? 1 : 0);
  for (const auto& [name, value] : out.metrics) {
    header << "," << name;
    row << "," << value;
  }
  std::ofstream(out_dir + "/metrics.csv") << header.str() << "\n" << row.str() << "\n";
}

}  // namespace

Json graph_to_json(const TaskGraph& graph) {
  Json j;
  j["nodes"] = Json::array();
  for (const auto& [id, node] : graph.nodes()) {
    Json n;
    n["id"] = id;
    n["description"] = node.description;
    n["action"] = action_to_json(node.action);
    n["post"] = post_to_json(node.post);
    j["nodes"].push_back(n);
  }
  j["edges"] = Json::array();
  for (const auto& [edge, provenance] : graph.edges()) {
    Json e;
    e["from"] = edge.first;
    e["to"] = edge.second;
    e["rules"] = provenance.rule_ids;
    j["edges"].push_back(e);
  }
  j["rejected_edges"] = Json::array();
  for (const auto& r : graph.rejected_edges()) {
    Json e;
    e["from"] = r.from;
    e["to"] = r.to;
    e["reason"] = r.reason;
    j["rejected_edges"].push_back(e);
  }
  return j;
}

Engine::Engine(Scenario scenario, EngineConfig config, Reasoner* reasoner)
    : scenario_(std::move(scenario)), config_(std::move(config)), reasoner_(reasoner) {
  if (!reasoner_) {
    owned_reasoner_ = std::make_unique<RuleReasoner>(RuleEngine());
    reasoner_ = owned_reasoner_.get();
  }
}

RunResult Engine::run() {
  RunResult out;
  out.scenario = scenario_.name;
  out.seed = config_.seed;

  EnvSummary env = scenario_.env_summary();
  std::vector<Subtask> subtasks = decompose(scenario_.goal, env, *reasoner_);

  TaskGraph g_init =
      build_initial_graph(subtasks, scenario_.rules, *reasoner_, config_.planner.samples);
  if (scenario_.injected_edge_count > 0) {
    int placed = inject_spurious_edges(g_init, scenario_.injected_edge_count, config_.seed);
    out.log.push_back("injected " + std::to_string(placed) + " spurious edges");
  }
  out.g_init = g_init;

  TaskGraph exec_graph = g_init;
  if (config_.use_graph && config_.causal_refine) {
    auto [refined, ledger] = refine_graph(g_init, scenario_.rules, *reasoner_, config_.planner);
    exec_graph = std::move(refined);
    out.ate = std::move(ledger);
  }
  out.g_refined = exec_graph;

  Scheduler::Config sched_config;
  sched_config.gating = config_.use_graph;
  sched_config.singleton_paths = !config_.use_graph;
  sched_config.random_assignment = !config_.busy_rate_assignment;
  sched_config.seed = config_.seed;
  Scheduler scheduler(exec_graph, sched_config);

  World world = scenario_.build_world();

  std::vector<int> active_agents;
  for (const auto& spawn : scenario_.spawns) active_agents.push_back(spawn.id);
  std::sort(active_agents.begin(), active_agents.end());
  if (config_.agent_count > 0 &&
      config_.agent_count < static_cast<int>(active_agents.size())) {
    active_agents.resize(static_cast<std::size_t>(config_.agent_count));
    out.log.push_back("limited to first " + std::to_string(config_.agent_count) + " agents");
  }
  for (int id : active_agents) out.agents[id] = AgentReport{};

  ScriptedPolicy scripted;
  std::unique_ptr<RemotePolicy> remote;
  Policy* policy = &scripted;
  if (config_.policy == "remote") {
    remote = std::make_unique<RemotePolicy>(*reasoner_);
    policy = remote.get();
  }

  std::ofstream trace;
  if (!config_.out_dir.empty()) {
    std::filesystem::create_directories(config_.out_dir);
    trace.open(config_.out_dir + "/trace.ndjson");
    Json header;
    header["type"] = "header";
    header["scenario"] = scenario_.name;
    header["seed"] = config_.seed;
    header["agents"] = active_agents;
    header["policy"] = config_.policy;
    header["causal_refine"] = config_.causal_refine;
    header["busy_rate_assignment"] = config_.busy_rate_assignment;
    header["use_graph"] = config_.use_graph;
    header["stall_ticks"] = config_.stall_ticks;
    header["tick_budget"] = scenario_.tick_budget;
    header["world_hash"] = world.state_hash();
    trace << header.dump() << "\n";
  }

  std::map<int, AgentRuntime> runtimes;
  for (int id : active_agents) runtimes[id];

  int tick = 0;
  while (tick < scenario_.tick_budget && !scheduler.finished()) {
    ++tick;
    std::vector<std::string> events;
    auto note = [&](const std::string& line) {
      events.push_back(line);
      out.log.push_back("tick " + std::to_string(tick) + ": " + line);
    };

    for (int agent_id : active_agents) {
      AgentRuntime& rt = runtimes[agent_id];
      if (!scheduler.has_assignment(agent_id)) {
        try {
          int path = scheduler.assign(agent_id);
          note("agent " + std::to_string(agent_id) + " takes path " + std::to_string(path));
          rt.stall = StallWatch{};
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoOpenPath) throw;
          continue;
        }
      }

      Scheduler::PollResult poll = scheduler.poll(agent_id);
      if (poll.status == Scheduler::PollStatus::Finished) {
        rt.stall = StallWatch{};
        rt.current_subtask = -1;
        try {
          int path = scheduler.assign(agent_id);
          note("agent " + std::to_string(agent_id) + " moves to path " + std::to_string(path));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NoOpenPath) throw;
          continue;
        }
        poll = scheduler.poll(agent_id);
        if (poll.status == Scheduler::PollStatus::Finished) continue;
      }

      if (poll.status == Scheduler::PollStatus::Wait) {
        if (!rt.stall.waiting) {
          rt.stall = {true, tick, world.mutation_count()};
        } else if (world.mutation_count() != rt.stall.mutations) {
          rt.stall.since_tick = tick;
          rt.stall.mutations = world.mutation_count();
        } else if (tick - rt.stall.since_tick >= config_.stall_ticks) {
          int stuck_path = scheduler.assigned_path(agent_id);
          rt.stall = StallWatch{};
          rt.current_subtask = -1;
          try {
            int path = scheduler.reassign(agent_id, stuck_path);
            note("agent " + std::to_string(agent_id) + " stalled on path " +
                 std::to_string(stuck_path) + ", moved to path " + std::to_string(path));
          } catch (const Error& e) {
            if (e.code() != ErrorCode::NoOpenPath) throw;
            note("agent " + std::to_string(agent_id) + " stalled on path " +
                 std::to_string(stuck_path) + ", no alternative open");
          }
        }
        continue;
      }

      // Issue: run one pipeline step.
      rt.stall = StallWatch{};
      const Subtask& subtask = scheduler.graph().node(poll.subtask_id);
      if (rt.current_subtask != poll.subtask_id) {
        rt.memory.reset_for_subtask(world);
        rt.current_subtask = poll.subtask_id;
      }
      ActionSpec action = policy->next_action(world, agent_id, subtask, rt.memory);
      ActionResult result = world.apply(agent_id, action);
      record_result(rt.memory, world, action, result);
      AgentReport& report = out.agents[agent_id];
      ++report.actions;
      if (!result.ok) ++report.failures;
      note("agent " + std::to_string(agent_id) + " [subtask " + std::to_string(subtask.id) +
           "] " + rt.memory.action_log.back());

      ReflectOutcome outcome = policy->reflect(world, agent_id, subtask, rt.memory);
      if (outcome == ReflectOutcome::Complete) {
        note(subtask_summary(agent_id, subtask, outcome, rt.memory));
        scheduler.report_success(agent_id, poll.subtask_id);
        ++report.completed;
        report.last_completion_tick = tick;
        rt.current_subtask = -1;
      } else if (outcome == ReflectOutcome::Stuck) {
        note(subtask_summary(agent_id, subtask, outcome, rt.memory));
        scheduler.report_failure(agent_id, poll.subtask_id);
        rt.current_subtask = -1;
      }
    }

    out.tick_hashes.push_back(world.state_hash());
    if (trace.is_open()) {
      Json line;
      line["type"] = "tick";
      line["tick"] = tick;
      line["hash"] = world.state_hash();
      line["events"] = events;
      trace << line.dump() << "\n";
    }
  }

  out.ticks = tick;
  if (scheduler.finished()) {
    bool all_complete = true;
    for (const auto& path : scheduler.paths()) {
      if (path.status != PathStatus::Complete) all_complete = false;
    }
    out.end_reason = all_complete ? EndReason::AllPathsFinished : EndReason::NoOpenPaths;
  } else {
    out.end_reason = EndReason::BudgetExceeded;
  }

  if (!world.audit_clean()) {
    throw Error(ErrorCode::DivergenceDetected, "item conservation audit failed after run");
  }

  score_run(scenario_, world, scheduler, active_agents, out);

  if (trace.is_open()) {
    Json footer;
    footer["type"] = "end";
    footer["reason"] = to_string(out.end_reason);
    footer["ticks"] = out.ticks;
    trace << footer.dump() << "\n";
  }
  if (!config_.out_dir.empty()) write_artifacts(config_.out_dir, out);
  return out;
}

RunResult run_scenario(const Scenario& scenario, const EngineConfig& config, Reasoner* reasoner) {
  Engine engine(scenario, config, reasoner);
  return engine.run();
}

std::map<std::string, RunResult> run_ablations(const Scenario& scenario,
                                               const EngineConfig& config) {
  std::map<std::string, RunResult> results;
  auto run_one = [&](const std::string& name, auto&& mutate) {
    EngineConfig variant = config;
    if (!config.out_dir.empty()) variant.out_dir = config.out_dir + "/" + name;
    mutate(variant);
    results[name] = run_scenario(scenario, variant);
  };
  run_one("full", [](EngineConfig&) {});
  run_one("no_causal", [](EngineConfig& c) { c.causal_refine = false; });
  run_one("no_busy_rate", [](EngineConfig& c) { c.busy_rate_assignment = false; });
  run_one("no_graph", [](EngineConfig& c) { c.use_graph = false; });
  return results;
}

ReplayReport replay_trace(const std::string& trace_path, const Scenario& scenario) {
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorCode::TraceCorrupt, "cannot open trace " + trace_path);

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::TraceCorrupt, "trace is empty");
  Json header = Json::parse(line, nullptr, false);
  if (header.is_discarded() || header.value("type", "") != "header") {
    throw Error(ErrorCode::TraceCorrupt, "first trace line is not a header");
  }
  if (header.value("scenario", "") != scenario.name) {
    throw Error(ErrorCode::TraceCorrupt, "trace was recorded for scenario '" +
                                             header.value("scenario", "") + "', not '" +
                                             scenario.name + "'");
  }
  if (header.value("policy", "scripted") != "scripted") {
    throw Error(ErrorCode::TraceCorrupt, "only scripted-policy traces can be replayed");
  }

  EngineConfig config;
  config.seed = header.value("seed", 0ull);
  config.causal_refine = header.value("causal_refine", true);
  config.busy_rate_assignment = header.value("busy_rate_assignment", true);
  config.use_graph = header.value("use_graph", true);
  config.stall_ticks = header.value("stall_ticks", 12);
  if (header.contains("agents") && header["agents"].is_array()) {
    config.agent_count = static_cast<int>(header["agents"].size());
  }

  World initial = scenario.build_world();
  if (header.contains("world_hash") &&
      header["world_hash"].get<std::uint64_t>() != initial.state_hash()) {
    throw Error(ErrorCode::DivergenceDetected,
                "scenario world differs from the one the trace was recorded on");
  }

  RunResult rerun = run_scenario(scenario, config);

  ReplayReport report;
  report.scenario = scenario.name;
  std::size_t index = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json entry = Json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.is_object()) {
      throw Error(ErrorCode::TraceCorrupt, "unreadable trace line " + std::to_string(index + 2));
    }
    std::string type = entry.value("type", "");
    if (type == "end") break;
    if (type != "tick") {
      throw Error(ErrorCode::TraceCorrupt, "unexpected trace entry '" + type + "'");
    }
    if (index >= rerun.tick_hashes.size()) {
      throw Error(ErrorCode::DivergenceDetected,
                  "re-run ended after " + std::to_string(rerun.tick_hashes.size()) +
                      " ticks, trace has more");
    }
    auto recorded = entry.value("hash", 0ull);
    if (recorded != rerun.tick_hashes[index]) {
      throw Error(ErrorCode::DivergenceDetected,
                  "world hash differs at tick " + std::to_string(entry.value("tick", 0)));
    }
    ++index;
    ++report.ticks_checked;
  }
  if (index != rerun.tick_hashes.size()) {
    throw Error(ErrorCode::DivergenceDetected,
                "trace records " + std::to_string(index) + " ticks, re-run produced " +
                    std::to_string(rerun.tick_hashes.size()));
  }
  return report;
}

}  // namespace causeway
