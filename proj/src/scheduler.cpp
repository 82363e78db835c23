#include "causeway/scheduler.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace causeway {

namespace {

std::vector<ExecutionPath> chain_cover(const TaskGraph& graph) {
  std::vector<ExecutionPath> paths;
  std::set<int> covered;
  int next_id = 1;
  for (const auto& [id, _] : graph.nodes()) {
    if (covered.count(id)) continue;
    std::deque<int> chain{id};
    int cur = id;
    while (true) {
      auto preds = graph.predecessors(cur);
      if (preds.empty()) break;
      int pick = preds.front();
      for (int p : preds) {
        if (!covered.count(p)) {
          pick = p;
          break;
        }
      }
      chain.push_front(pick);
      cur = pick;
    }
    cur = id;
    while (true) {
      auto succs = graph.successors(cur);
      if (succs.empty()) break;
      int pick = succs.front();
      for (int s : succs) {
        if (!covered.count(s)) {
          pick = s;
          break;
        }
      }
      chain.push_back(pick);
      cur = pick;
    }
    for (int sid : chain) covered.insert(sid);
    paths.push_back({next_id++, {chain.begin(), chain.end()}, PathStatus::Open, false});
  }
  return paths;
}

}  // namespace

std::vector<ExecutionPath> enumerate_paths(const TaskGraph& graph, std::size_t cap) {
  if (graph.empty()) {
    throw Error(ErrorCode::EmptyGraph, "cannot enumerate paths of an empty graph");
  }

  // Count root-to-leaf chains first, saturating at cap + 1, so a blow-up is
  // detected without materializing anything.
  std::map<int, std::size_t> memo;
  std::function<std::size_t(int)> count = [&](int v) -> std::size_t {
    auto it = memo.find(v);
    if (it != memo.end()) return it->second;
    auto succs = graph.successors(v);
    std::size_t total = 0;
    if (succs.empty()) {
      total = 1;
    } else {
      for (int s : succs) {
        total = std::min(total + count(s), cap + 1);
        if (total > cap) break;
      }
    }
    memo[v] = total;
    return total;
  };
  std::size_t total = 0;
  for (int r : graph.roots()) {
    total = std::min(total + count(r), cap + 1);
    if (total > cap) break;
  }
  if (total > cap) return chain_cover(graph);

  std::vector<ExecutionPath> paths;
  std::vector<int> stack;
  std::function<void(int)> walk = [&](int v) {
    stack.push_back(v);
    auto succs = graph.successors(v);
    if (succs.empty()) {
      paths.push_back({static_cast<int>(paths.size()) + 1, stack, PathStatus::Open, false});
    } else {
      for (int s : succs) walk(s);
    }
    stack.pop_back();
  };
  for (int r : graph.roots()) walk(r);
  return paths;
}

Scheduler::Scheduler(TaskGraph graph, Config config)
    : graph_(std::move(graph)), config_(config), rng_(Rng(config.seed).fork("assignment")) {
  if (graph_.empty()) {
    throw Error(ErrorCode::EmptyGraph, "scheduler needs at least one subtask");
  }
  if (config_.singleton_paths) {
    int next_id = 1;
    for (const auto& [id, _] : graph_.nodes()) {
      paths_.push_back({next_id++, {id}, PathStatus::Open, false});
    }
  } else {
    paths_ = enumerate_paths(graph_, config_.path_cap);
  }
}

const ExecutionPath& Scheduler::path(int id) const {
  if (id < 1 || id > static_cast<int>(paths_.size())) {
    throw Error(ErrorCode::UnknownPath, "no path with id " + std::to_string(id));
  }
  return paths_[static_cast<std::size_t>(id) - 1];
}

ExecutionPath& Scheduler::path_mut(int id) {
  return const_cast<ExecutionPath&>(path(id));
}

double Scheduler::busy_rate(int path_id) const {
  path(path_id);  // bounds check
  double rate = 0.0;
  for (const auto& [agent, a] : assignments_) {
    if (a.path_id == path_id) rate += 1.0 / static_cast<double>(a.cursor + 1);
  }
  return rate;
}

int Scheduler::pick_path(int excluded_path_id) {
  std::vector<int> open_ids;
  for (const auto& p : paths_) {
    if (p.status == PathStatus::Open && p.id != excluded_path_id) open_ids.push_back(p.id);
  }
  if (open_ids.empty()) {
    throw Error(ErrorCode::NoOpenPath, "no open execution path to assign");
  }
  if (config_.random_assignment) {
    return open_ids[static_cast<std::size_t>(
        rng_.range(0, static_cast<int>(open_ids.size()) - 1))];
  }
  int best = open_ids.front();
  double best_rate = busy_rate(best);
  for (int id : open_ids) {
    double rate = busy_rate(id);
    if (rate < best_rate - 1e-12) {
      best = id;
      best_rate = rate;
    }
  }
  return best;
}

int Scheduler::assign(int agent_id) {
  release(agent_id);
  int chosen = pick_path(0);
  assignments_[agent_id] = {chosen, 0};
  return chosen;
}

int Scheduler::reassign(int agent_id, int excluded_path_id) {
  release(agent_id);
  int chosen = pick_path(excluded_path_id);
  assignments_[agent_id] = {chosen, 0};
  return chosen;
}

void Scheduler::release(int agent_id) {
  for (auto it = in_progress_.begin(); it != in_progress_.end();) {
    if (it->second == agent_id) {
      graph_.node(it->first).state = SubtaskState::Pending;
      it = in_progress_.erase(it);
    } else {
      ++it;
    }
  }
  assignments_.erase(agent_id);
}

bool Scheduler::has_assignment(int agent_id) const {
  return assignments_.count(agent_id) != 0;
}

int Scheduler::assigned_path(int agent_id) const {
  auto it = assignments_.find(agent_id);
  if (it == assignments_.end()) {
    throw Error(ErrorCode::UnknownAgent, "agent " + std::to_string(agent_id) + " holds no path");
  }
  return it->second.path_id;
}

int Scheduler::cursor_of(int agent_id) const {
  auto it = assignments_.find(agent_id);
  if (it == assignments_.end()) {
    throw Error(ErrorCode::UnknownAgent, "agent " + std::to_string(agent_id) + " holds no path");
  }
  return it->second.cursor;
}

void Scheduler::finish_assignment(int agent_id) {
  assignments_.erase(agent_id);
}

Scheduler::PollResult Scheduler::poll(int agent_id) {
  auto it = assignments_.find(agent_id);
  if (it == assignments_.end()) {
    throw Error(ErrorCode::UnknownAgent, "agent " + std::to_string(agent_id) + " holds no path");
  }
  for (const auto& [sid, owner] : in_progress_) {
    if (owner == agent_id) return {PollStatus::Issue, sid};
  }
  Assignment& a = it->second;
  ExecutionPath& p = path_mut(a.path_id);
  if (p.status != PathStatus::Open) {
    finish_assignment(agent_id);
    return {PollStatus::Finished, -1};
  }
  auto size = static_cast<int>(p.subtask_ids.size());
  while (a.cursor < size && completed_.count(p.subtask_ids[a.cursor])) ++a.cursor;
  if (a.cursor >= size) {
    p.status = PathStatus::Complete;
    finish_assignment(agent_id);
    return {PollStatus::Finished, -1};
  }
  int sid = p.subtask_ids[a.cursor];
  Subtask& s = graph_.node(sid);
  if (s.state == SubtaskState::Failed) {
    block_path(p);
    finish_assignment(agent_id);
    return {PollStatus::Finished, -1};
  }
  if (in_progress_.count(sid)) return {PollStatus::Wait, sid};
  if (config_.gating) {
    for (int pred : graph_.predecessors(sid)) {
      if (completed_.count(pred)) continue;
      if (graph_.node(pred).state == SubtaskState::Failed) {
        block_path(p);
        finish_assignment(agent_id);
        return {PollStatus::Finished, -1};
      }
      return {PollStatus::Wait, sid};
    }
  }
  s.state = SubtaskState::InProgress;
  in_progress_[sid] = agent_id;
  return {PollStatus::Issue, sid};
}

void Scheduler::report_success(int agent_id, int subtask_id) {
  graph_.node(subtask_id).state = SubtaskState::Done;
  completed_.insert(subtask_id);
  in_progress_.erase(subtask_id);
  auto it = assignments_.find(agent_id);
  if (it != assignments_.end()) {
    const ExecutionPath& p = path(it->second.path_id);
    int cursor = it->second.cursor;
    if (cursor < static_cast<int>(p.subtask_ids.size()) && p.subtask_ids[cursor] == subtask_id) {
      ++it->second.cursor;
    }
  }
  sweep_paths();
}

void Scheduler::report_failure(int agent_id, int subtask_id) {
  in_progress_.erase(subtask_id);
  Subtask& s = graph_.node(subtask_id);
  ++s.attempts;
  if (s.attempts >= config_.retry_cap) {
    s.state = SubtaskState::Failed;
    auto it = assignments_.find(agent_id);
    if (it != assignments_.end()) {
      block_path(path_mut(it->second.path_id));
      finish_assignment(agent_id);
    }
    sweep_paths();
  } else {
    s.state = SubtaskState::Pending;
  }
}

void Scheduler::block_path(ExecutionPath& path) {
  if (path.status == PathStatus::Blocked) return;
  path.status = PathStatus::Blocked;
  // Pending subtasks stranded on this path stay reachable through a
  // synthesized single-subtask recovery path, once each. Copy the ids first:
  // growing paths_ below invalidates `path`.
  const std::vector<int> stranded = path.subtask_ids;
  for (int sid : stranded) {
    if (completed_.count(sid)) continue;
    if (graph_.node(sid).state == SubtaskState::Failed) continue;
    if (recovered_.count(sid)) continue;
    bool reachable = false;
    for (const auto& other : paths_) {
      if (other.status != PathStatus::Open) continue;
      if (std::find(other.subtask_ids.begin(), other.subtask_ids.end(), sid) !=
          other.subtask_ids.end()) {
        reachable = true;
        break;
      }
    }
    if (reachable) continue;
    recovered_.insert(sid);
    paths_.push_back({static_cast<int>(paths_.size()) + 1, {sid}, PathStatus::Open, true});
  }
}

void Scheduler::sweep_paths() {
  std::size_t n = paths_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (paths_[i].status != PathStatus::Open) continue;
    bool all_done = true;
    bool has_failed = false;
    for (int sid : paths_[i].subtask_ids) {
      if (!completed_.count(sid)) all_done = false;
      if (graph_.node(sid).state == SubtaskState::Failed) has_failed = true;
    }
    if (all_done) {
      paths_[i].status = PathStatus::Complete;
    } else if (has_failed) {
      block_path(paths_[i]);
    }
  }
}

int Scheduler::attempts(int subtask_id) const {
  return graph_.node(subtask_id).attempts;
}

int Scheduler::open_path_count() const {
  int open = 0;
  for (const auto& p : paths_) {
    if (p.status == PathStatus::Open) ++open;
  }
  return open;
}

}  // namespace causeway
