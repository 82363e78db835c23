#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causeway/common.hpp"

namespace causeway {

enum class ActionKind {
  NavigateTo,
  CheckContainer,
  WithdrawItem,
  ScanEntities,
  Equip,
  PlaceBlock,
  Handover,
  Craft,
  Smelt,
  MineBlock,
  Toggle,
  UseOn,
  Attack,
};

const char* to_string(ActionKind kind);
std::optional<ActionKind> action_kind_from(std::string_view name);

// One struct covers the whole action vocabulary; unused fields stay at their
// defaults. `item` is the block/item/entity kind the action is about.
struct ActionSpec {
  ActionKind kind = ActionKind::NavigateTo;
  std::string item;
  std::optional<Vec3> pos;
  std::optional<Vec3> container;
  int amount = 1;
  std::string fuel;
  std::string tool;
  int target_agent = -1;
  int distance = 0;
  std::optional<std::string> facing;
  std::optional<bool> desired_state;
  // Ingredient/fuel source containers baked in at decomposition time.
  std::map<std::string, Vec3> item_sources;
};

enum class PostKind {
  None,
  BlockPresent,
  BlockAbsent,
  AgentHasItem,
  ContainerStocked,
  MechanismState,
  AgentAt,
};

const char* to_string(PostKind kind);

struct Postcondition {
  PostKind kind = PostKind::None;
  Vec3 pos{};
  std::string item;
  int count = 1;
  bool on = false;
};

enum class SubtaskState { Pending, InProgress, Done, Failed };

const char* to_string(SubtaskState state);

struct Subtask {
  int id = 0;
  std::string description;
  ActionSpec action;
  Postcondition post;
  SubtaskState state = SubtaskState::Pending;
  int attempts = 0;
};

struct EdgeProvenance {
  std::vector<int> rule_ids;  // asserting rules; empty for unexplained edges
  bool pruned = false;
};

struct RejectedEdge {
  int from = 0;
  int to = 0;
  std::string reason;
};

// Directed acyclic dependency graph over subtasks. add_edge refuses edges
// that would close a cycle and records the rejection instead.
class TaskGraph {
 public:
  enum class EdgeOutcome { Added, RejectedCycle, RejectedDangling, Duplicate };

  const std::map<int, Subtask>& nodes() const { return nodes_; }
  const std::map<std::pair<int, int>, EdgeProvenance>& edges() const { return edges_; }
  const std::vector<RejectedEdge>& rejected_edges() const { return rejected_; }

  bool empty() const { return nodes_.empty(); }
  bool has_node(int id) const { return nodes_.count(id) != 0; }
  bool has_edge(int from, int to) const { return edges_.count({from, to}) != 0; }

  Subtask& node(int id);
  const Subtask& node(int id) const;

  void add_node(Subtask subtask);  // throws on duplicate id
  EdgeOutcome add_edge(int from, int to, EdgeProvenance provenance = {});
  void remove_edge(int from, int to);

  std::vector<int> successors(int id) const;    // ascending
  std::vector<int> predecessors(int id) const;  // ascending
  std::vector<int> roots() const;               // ascending, zero in-degree
  std::vector<int> leaves() const;              // ascending, zero out-degree

  bool path_exists(int from, int to) const;

  // Kahn's algorithm; nullopt when the stored edges contain a cycle (possible
  // only for graphs built through unchecked()).
  std::optional<std::vector<int>> topological_order() const;

  bool edges_subset_of(const TaskGraph& other) const;

  // Restores a graph verbatim (deserialization, validation tests). Keeps
  // dangling and cyclic edges; first node wins on a duplicated id.
  static TaskGraph unchecked(const std::vector<Subtask>& nodes,
                             const std::vector<std::pair<int, int>>& edges,
                             const std::vector<EdgeProvenance>& provenance = {});

 private:
  std::map<int, Subtask> nodes_;
  std::map<std::pair<int, int>, EdgeProvenance> edges_;
  std::vector<RejectedEdge> rejected_;
};

enum class PredicateKind {
  PossessionBeforePlacement,
  RetrievalBeforeUse,
  EquipBeforePlace,
  LowerBlocksFirst,
  CraftRequiresIngredients,
  ToggleLowerFirst,
  KindOrder,
};

const char* to_string(PredicateKind kind);
std::optional<PredicateKind> predicate_kind_from(std::string_view name);

struct Rule {
  int id = 0;
  std::string statement;
  std::string counterfactual_statement;
  PredicateKind predicate = PredicateKind::KindOrder;
  std::vector<std::string> params;
};

struct RuleSet {
  std::vector<Rule> rules;

  std::size_t size() const { return rules.size(); }
  const Rule& at(std::size_t index_1based) const;
  bool ids_unique() const;
};

enum class PathStatus { Open, Complete, Blocked };

const char* to_string(PathStatus status);

struct ExecutionPath {
  int id = 0;
  std::vector<int> subtask_ids;
  PathStatus status = PathStatus::Open;
  bool synthesized = false;  // recovery path, may start below a root
};

struct GraphViolation {
  enum class Kind { CycleFound, DanglingEdge, DuplicateId };
  Kind kind = Kind::CycleFound;
  std::vector<int> ids;

  std::string describe() const;
};

std::vector<GraphViolation> validate_graph(const std::vector<Subtask>& nodes,
                                           const std::vector<std::pair<int, int>>& edges);
std::vector<GraphViolation> validate_graph(const TaskGraph& graph);

}  // namespace causeway
