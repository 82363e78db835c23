#include "causeway/task.hpp"

#include <array>
#include <deque>
#include <sstream>

namespace causeway {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MalformedActionSpec: return "MalformedActionSpec";
    case ErrorCode::IdenticalPair: return "IdenticalPair";
    case ErrorCode::RemoteUnavailable: return "RemoteUnavailable";
    case ErrorCode::DecompositionFailed: return "DecompositionFailed";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::DuplicateSubtask: return "DuplicateSubtask";
    case ErrorCode::UnknownPath: return "UnknownPath";
    case ErrorCode::NoOpenPath: return "NoOpenPath";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::NoSubtask: return "NoSubtask";
    case ErrorCode::ZeroIndicators: return "ZeroIndicators";
    case ErrorCode::EmptyBlueprint: return "EmptyBlueprint";
    case ErrorCode::NoViewpoints: return "NoViewpoints";
    case ErrorCode::ZeroTime: return "ZeroTime";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::EmptyRecipe: return "EmptyRecipe";
    case ErrorCode::ZeroTotal: return "ZeroTotal";
    case ErrorCode::EmptyRooms: return "EmptyRooms";
    case ErrorCode::ZeroAttempts: return "ZeroAttempts";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::TraceCorrupt: return "TraceCorrupt";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
  }
  return "UnknownError";
}

std::string to_string(const Vec3& v) {
  std::ostringstream os;
  os << "(" << v.x << "," << v.y << "," << v.z << ")";
  return os.str();
}

namespace {

constexpr std::array<const char*, 13> kActionNames = {
    "navigate_to", "check_container", "withdraw_item", "scan_entities", "equip",
    "place_block", "handover",        "craft",         "smelt",         "mine_block",
    "toggle",      "use_on",          "attack",
};

constexpr std::array<const char*, 7> kPredicateNames = {
    "possession_before_placement",
    "retrieval_before_use",
    "equip_before_place",
    "lower_blocks_first",
    "craft_requires_ingredients",
    "toggle_lower_first",
    "kind_order",
};

}  // namespace

const char* to_string(ActionKind kind) { return kActionNames[static_cast<int>(kind)]; }

std::optional<ActionKind> action_kind_from(std::string_view name) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (name == kActionNames[i]) return static_cast<ActionKind>(i);
  }
  return std::nullopt;
}

const char* to_string(PredicateKind kind) { return kPredicateNames[static_cast<int>(kind)]; }

std::optional<PredicateKind> predicate_kind_from(std::string_view name) {
  for (std::size_t i = 0; i < kPredicateNames.size(); ++i) {
    if (name == kPredicateNames[i]) return static_cast<PredicateKind>(i);
  }
  return std::nullopt;
}

const char* to_string(SubtaskState state) {
  switch (state) {
    case SubtaskState::Pending: return "pending";
    case SubtaskState::InProgress: return "in_progress";
    case SubtaskState::Done: return "done";
    case SubtaskState::Failed: return "failed";
  }
  return "?";
}

const char* to_string(PostKind kind) {
  switch (kind) {
    case PostKind::None: return "none";
    case PostKind::BlockPresent: return "block_present";
    case PostKind::BlockAbsent: return "block_absent";
    case PostKind::AgentHasItem: return "agent_has_item";
    case PostKind::ContainerStocked: return "container_stocked";
    case PostKind::MechanismState: return "mechanism_state";
    case PostKind::AgentAt: return "agent_at";
  }
  return "?";
}

const char* to_string(PathStatus status) {
  switch (status) {
    case PathStatus::Open: return "open";
    case PathStatus::Complete: return "complete";
    case PathStatus::Blocked: return "blocked";
  }
  return "?";
}

Subtask& TaskGraph::node(int id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::NoSubtask, "no node " + std::to_string(id));
  return it->second;
}

const Subtask& TaskGraph::node(int id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorCode::NoSubtask, "no node " + std::to_string(id));
  return it->second;
}

void TaskGraph::add_node(Subtask subtask) {
  int id = subtask.id;
  if (!nodes_.emplace(id, std::move(subtask)).second) {
    throw Error(ErrorCode::DuplicateSubtask, "subtask id " + std::to_string(id));
  }
}

bool TaskGraph::path_exists(int from, int to) const {
  if (from == to) return true;
  std::deque<int> queue{from};
  std::set<int> seen{from};
  while (!queue.empty()) {
    int cur = queue.front();
    queue.pop_front();
    for (const auto& [edge, _] : edges_) {
      if (edge.first != cur || !seen.insert(edge.second).second) continue;
      if (edge.second == to) return true;
      queue.push_back(edge.second);
    }
  }
  return false;
}

TaskGraph::EdgeOutcome TaskGraph::add_edge(int from, int to, EdgeProvenance provenance) {
  if (!has_node(from) || !has_node(to)) {
    rejected_.push_back({from, to, "dangling endpoint"});
    return EdgeOutcome::RejectedDangling;
  }
  if (has_edge(from, to)) return EdgeOutcome::Duplicate;
  if (from == to || path_exists(to, from)) {
    rejected_.push_back({from, to, "would close a cycle"});
    return EdgeOutcome::RejectedCycle;
  }
  edges_.emplace(std::make_pair(from, to), std::move(provenance));
  return EdgeOutcome::Added;
}

void TaskGraph::remove_edge(int from, int to) { edges_.erase({from, to}); }

std::vector<int> TaskGraph::successors(int id) const {
  std::vector<int> out;
  for (const auto& [edge, _] : edges_) {
    if (edge.first == id) out.push_back(edge.second);
  }
  return out;  // map order keeps these ascending
}

std::vector<int> TaskGraph::predecessors(int id) const {
  std::vector<int> out;
  for (const auto& [edge, _] : edges_) {
    if (edge.second == id) out.push_back(edge.first);
  }
  return out;
}

std::vector<int> TaskGraph::roots() const {
  std::set<int> with_incoming;
  for (const auto& [edge, _] : edges_) with_incoming.insert(edge.second);
  std::vector<int> out;
  for (const auto& [id, _] : nodes_) {
    if (!with_incoming.count(id)) out.push_back(id);
  }
  return out;
}

std::vector<int> TaskGraph::leaves() const {
  std::set<int> with_outgoing;
  for (const auto& [edge, _] : edges_) with_outgoing.insert(edge.first);
  std::vector<int> out;
  for (const auto& [id, _] : nodes_) {
    if (!with_outgoing.count(id)) out.push_back(id);
  }
  return out;
}

std::optional<std::vector<int>> TaskGraph::topological_order() const {
  std::map<int, int> in_degree;
  for (const auto& [id, _] : nodes_) in_degree[id] = 0;
  for (const auto& [edge, _] : edges_) {
    if (in_degree.count(edge.second) && in_degree.count(edge.first)) ++in_degree[edge.second];
  }
  std::set<int> ready;
  for (const auto& [id, deg] : in_degree) {
    if (deg == 0) ready.insert(id);
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (int next : successors(id)) {
      if (in_degree.count(next) && --in_degree[next] == 0) ready.insert(next);
    }
  }
  if (order.size() != nodes_.size()) return std::nullopt;
  return order;
}

bool TaskGraph::edges_subset_of(const TaskGraph& other) const {
  for (const auto& [edge, _] : edges_) {
    if (!other.has_edge(edge.first, edge.second)) return false;
  }
  return true;
}

TaskGraph TaskGraph::unchecked(const std::vector<Subtask>& nodes,
                               const std::vector<std::pair<int, int>>& edges,
                               const std::vector<EdgeProvenance>& provenance) {
  TaskGraph g;
  for (const auto& s : nodes) g.nodes_.emplace(s.id, s);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    EdgeProvenance p = i < provenance.size() ? provenance[i] : EdgeProvenance{};
    g.edges_.emplace(edges[i], std::move(p));
  }
  return g;
}

const Rule& RuleSet::at(std::size_t index_1based) const {
  if (index_1based < 1 || index_1based > rules.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "rule index " + std::to_string(index_1based) + " of " + std::to_string(rules.size()));
  }
  return rules[index_1based - 1];
}

bool RuleSet::ids_unique() const {
  std::set<int> seen;
  for (const auto& r : rules) {
    if (!seen.insert(r.id).second) return false;
  }
  return true;
}

std::string GraphViolation::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::CycleFound: os << "cycle through nodes"; break;
    case Kind::DanglingEdge: os << "edge references missing node"; break;
    case Kind::DuplicateId: os << "duplicate subtask id"; break;
  }
  for (int id : ids) os << " " << id;
  return os.str();
}

std::vector<GraphViolation> validate_graph(const std::vector<Subtask>& nodes,
                                           const std::vector<std::pair<int, int>>& edges) {
  std::vector<GraphViolation> out;
  std::set<int> ids;
  std::set<int> duplicated;
  for (const auto& s : nodes) {
    if (!ids.insert(s.id).second) duplicated.insert(s.id);
  }
  for (int id : duplicated) {
    out.push_back({GraphViolation::Kind::DuplicateId, {id}});
  }
  for (const auto& [from, to] : edges) {
    if (!ids.count(from) || !ids.count(to)) {
      out.push_back({GraphViolation::Kind::DanglingEdge, {from, to}});
    }
  }

  // Kahn over the edges whose endpoints exist; leftovers sit on a cycle.
  std::map<int, int> in_degree;
  for (int id : ids) in_degree[id] = 0;
  std::multimap<int, int> adjacency;
  for (const auto& [from, to] : edges) {
    if (ids.count(from) && ids.count(to)) {
      ++in_degree[to];
      adjacency.emplace(from, to);
    }
  }
  std::set<int> ready;
  for (const auto& [id, deg] : in_degree) {
    if (deg == 0) ready.insert(id);
  }
  std::size_t emitted = 0;
  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    ++emitted;
    auto [lo, hi] = adjacency.equal_range(id);
    for (auto it = lo; it != hi; ++it) {
      if (--in_degree[it->second] == 0) ready.insert(it->second);
    }
  }
  if (emitted != in_degree.size()) {
    GraphViolation v{GraphViolation::Kind::CycleFound, {}};
    for (const auto& [id, deg] : in_degree) {
      if (deg > 0) v.ids.push_back(id);
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<GraphViolation> validate_graph(const TaskGraph& graph) {
  std::vector<Subtask> nodes;
  for (const auto& [_, s] : graph.nodes()) nodes.push_back(s);
  std::vector<std::pair<int, int>> edges;
  for (const auto& [edge, _] : graph.edges()) edges.push_back(edge);
  return validate_graph(nodes, edges);
}

}  // namespace causeway
