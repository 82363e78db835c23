#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "causeway/common.hpp"
#include "causeway/task.hpp"

namespace causeway {

// Every simple root-to-leaf chain of the dependency graph, ids from 1 in DFS
// discovery order (roots ascending, successors ascending). When the chain
// count exceeds `cap` the enumeration falls back to a greedy chain cover so
// each node still appears on at least one path. Throws EmptyGraph.
std::vector<ExecutionPath> enumerate_paths(const TaskGraph& graph, std::size_t cap = 10000);

// Hands paths to agents by busy rate and issues subtasks along them.
//
// Busy rate of a path is the sum of 1/d over agents assigned to it, d being
// the 1-based cursor position, so a fresh assignment adds exactly 1.0.
// Cursors skip subtasks already completed on other paths, but only at poll
// time; assignment records the path entrance.
class Scheduler {
 public:
  struct Config {
    int retry_cap = 3;             // attempts per subtask before its paths block
    std::size_t path_cap = 10000;  // enumeration budget before chain-cover fallback
    bool gating = true;            // wait on cross-path predecessors
    bool singleton_paths = false;  // one path per subtask, ignoring edges
    bool random_assignment = false;  // uniform draw instead of busy-rate argmin
    std::uint64_t seed = 0;          // stream for random_assignment
  };

  enum class PollStatus {
    Issue,     // subtask_id is ready to execute
    Wait,      // predecessors pending or another agent mid-flight
    Finished,  // assignment ended (path complete or blocked); reassign
  };

  struct PollResult {
    PollStatus status = PollStatus::Wait;
    int subtask_id = -1;
  };

  explicit Scheduler(TaskGraph graph) : Scheduler(std::move(graph), Config()) {}
  Scheduler(TaskGraph graph, Config config);

  const TaskGraph& graph() const { return graph_; }
  const Config& config() const { return config_; }
  const std::vector<ExecutionPath>& paths() const { return paths_; }
  const ExecutionPath& path(int id) const;  // throws UnknownPath
  double busy_rate(int path_id) const;      // throws UnknownPath

  // Picks the open path with the lowest busy rate (ties: lowest id) and
  // places the agent at its entrance. Throws NoOpenPath.
  int assign(int agent_id);

  // Same, but never the named path. Used after a stall release so the agent
  // does not immediately re-enter the path it just left.
  int reassign(int agent_id, int excluded_path_id);

  // Drops the assignment without consuming an attempt; any in-flight subtask
  // returns to Pending.
  void release(int agent_id);

  bool has_assignment(int agent_id) const;
  int assigned_path(int agent_id) const;  // throws UnknownAgent
  int cursor_of(int agent_id) const;      // throws UnknownAgent

  PollResult poll(int agent_id);  // throws UnknownAgent

  void report_success(int agent_id, int subtask_id);
  void report_failure(int agent_id, int subtask_id);

  bool subtask_completed(int subtask_id) const { return completed_.count(subtask_id) != 0; }
  const std::set<int>& completed() const { return completed_; }
  int attempts(int subtask_id) const;

  int open_path_count() const;
  bool finished() const { return open_path_count() == 0; }

 private:
  struct Assignment {
    int path_id = 0;
    int cursor = 0;  // index of the next subtask in the path
  };

  ExecutionPath& path_mut(int id);
  int pick_path(int excluded_path_id);
  void block_path(ExecutionPath& path);
  void finish_assignment(int agent_id);
  void sweep_paths();

  TaskGraph graph_;
  Config config_;
  Rng rng_;
  std::vector<ExecutionPath> paths_;
  std::map<int, Assignment> assignments_;  // agent id -> position
  std::map<int, int> in_progress_;         // subtask id -> agent id
  std::set<int> completed_;
  std::set<int> recovered_;  // subtasks already given a recovery path
};

}  // namespace causeway
