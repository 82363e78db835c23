#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "causeway/common.hpp"
#include "causeway/rules.hpp"
#include "causeway/task.hpp"

namespace causeway {

enum class FailReason {
  None,
  BadSpec,
  TooFar,
  NoPath,
  Occupied,
  NoSupport,
  MissingItem,
  NotEquipped,
  NoContainer,
  InsufficientStock,
  NoSuchBlock,
  ProtectedBlock,
  WrongTool,
  NoSuchEntity,
  NoRecipe,
  NoStation,
  MissingIngredients,
  MissingFuel,
  NoMechanism,
  NoUseRule,
  UnknownTarget,
};

const char* to_string(FailReason reason);

struct ActionResult {
  bool ok = false;
  FailReason reason = FailReason::None;
  int cost = 0;
  std::string detail;
};

struct Block {
  std::string kind;
  std::optional<std::string> facing;

  bool operator==(const Block&) const = default;
};

struct Entity {
  int id = 0;
  std::string kind;
  Vec3 pos{};
  bool alive = true;
};

struct AgentState {
  int id = 0;
  Vec3 pos{};
  std::map<std::string, int> inventory;
  std::string equipped;
};

struct ScanHit {
  bool is_entity = false;
  std::string kind;
  Vec3 pos{};
  int id = -1;  // entity id, -1 for blocks
};

struct Observation {
  int agent_id = 0;
  Vec3 pos{};
  std::map<std::string, int> inventory;
  std::string equipped;
  std::uint64_t clock = 0;
  std::uint64_t mutation_count = 0;
  // Entities first, then station blocks (chest, crafting_table, furnace),
  // each group ordered by position.
  std::vector<ScanHit> scan;
};

struct WorldConfig {
  int reach = 4;        // Chebyshev radius for interactions
  int scan_radius = 16;  // Chebyshev radius for observations
  int bfs_node_cap = 8192;
  // Per-action cost overrides; anything absent uses the built-in defaults
  // (move 1 per step, place/mine 2, craft 4, smelt 8, everything else 1).
  std::map<ActionKind, int> action_costs;
};

// Deterministic voxel world. Agents are two blocks tall; a cell is walkable
// when it and the cell above are clear and the cell below is solid. All
// mutation goes through apply(), which advances the clock by the action cost
// and bumps mutation_count when state actually changed.
class World {
 public:
  World() : World(WorldConfig{}, default_recipes(), default_loot(), default_use_rules()) {}
  World(WorldConfig config, RecipeBook recipes, LootTable loot, UseRules use_rules);

  // Construction-time setup; not counted as mutations.
  void set_block(const Vec3& pos, const std::string& kind,
                 std::optional<std::string> facing = std::nullopt);
  void fill_blocks(const Vec3& from, const Vec3& to, const std::string& kind);
  void add_container(const Vec3& pos, std::map<std::string, int> items);
  void add_mechanism(const Vec3& pos, bool on);
  int add_entity(const std::string& kind, const Vec3& pos);
  void add_agent(int id, const Vec3& pos);
  void give_item(int agent_id, const std::string& item, int amount);
  // Snapshots current item totals as the conservation baseline.
  void reset_audit();

  ActionResult apply(int agent_id, const ActionSpec& spec);  // throws UnknownAgent

  Observation observe(int agent_id) const;  // throws UnknownAgent
  bool postcondition_holds(int agent_id, const Postcondition& post) const;

  std::optional<Block> block_at(const Vec3& pos) const;
  bool solid(const Vec3& pos) const { return blocks_.count(pos) != 0; }
  bool walkable(const Vec3& pos) const;
  std::optional<bool> mechanism_at(const Vec3& pos) const;
  bool has_container(const Vec3& pos) const { return containers_.count(pos) != 0; }
  int container_stock(const Vec3& pos, const std::string& item) const;
  const AgentState& agent(int id) const;  // throws UnknownAgent

  // Living entities of a kind within the radius, nearest first (ties by
  // position order, then id).
  std::vector<Entity> find_entities(const std::string& kind, const Vec3& center,
                                    int radius) const;
  // Blocks of a kind within the radius of center, position order.
  std::vector<Vec3> find_blocks(const std::string& kind, const Vec3& center, int radius) const;

  // Shortest step sequence from `from` to any walkable cell within
  // `arrive_within` of `target`; nullopt when unreachable under the node cap.
  std::optional<std::vector<Vec3>> find_path(const Vec3& from, const Vec3& target,
                                             int arrive_within) const;

  const std::map<Vec3, Block>& blocks() const { return blocks_; }
  const std::map<Vec3, std::map<std::string, int>>& containers() const { return containers_; }
  const std::map<Vec3, bool>& mechanisms() const { return mechanisms_; }
  const std::map<int, Entity>& entities() const { return entities_; }
  const std::map<int, AgentState>& agents() const { return agents_; }
  const WorldConfig& config() const { return config_; }
  const RecipeBook& recipes() const { return recipes_; }
  const LootTable& loot() const { return loot_; }

  std::uint64_t clock() const { return clock_; }
  std::uint64_t mutation_count() const { return mutation_count_; }

  // Items across all inventories and containers.
  std::map<std::string, int> item_totals() const;
  // True when totals match the audit baseline plus every delta applied since
  // reset_audit(); catches any action that invents or leaks items.
  bool audit_clean() const;

  nlohmann::ordered_json to_json() const;
  std::uint64_t state_hash() const;

  int cost_of(ActionKind kind) const;

 private:
  AgentState& agent_mut(int id);
  ActionResult fail(FailReason reason, ActionKind kind, const std::string& detail);
  ActionResult success(int cost, bool mutated, const std::string& detail);
  bool within_reach(const Vec3& agent_pos, const Vec3& target) const;
  void adjust_expected(const std::string& item, int delta);

  ActionResult do_navigate(AgentState& a, const ActionSpec& spec);
  ActionResult do_check_container(AgentState& a, const ActionSpec& spec);
  ActionResult do_withdraw(AgentState& a, const ActionSpec& spec);
  ActionResult do_scan(AgentState& a, const ActionSpec& spec);
  ActionResult do_equip(AgentState& a, const ActionSpec& spec);
  ActionResult do_place(AgentState& a, const ActionSpec& spec);
  ActionResult do_handover(AgentState& a, const ActionSpec& spec);
  ActionResult do_craft(AgentState& a, const ActionSpec& spec, bool furnace);
  ActionResult do_mine(AgentState& a, const ActionSpec& spec);
  ActionResult do_toggle(AgentState& a, const ActionSpec& spec);
  ActionResult do_use_on(AgentState& a, const ActionSpec& spec);
  ActionResult do_attack(AgentState& a, const ActionSpec& spec);

  WorldConfig config_;
  RecipeBook recipes_;
  LootTable loot_;
  UseRules use_rules_;

  std::map<Vec3, Block> blocks_;
  std::map<Vec3, std::map<std::string, int>> containers_;
  std::map<Vec3, bool> mechanisms_;
  std::map<int, Entity> entities_;
  std::map<int, AgentState> agents_;
  int next_entity_id_ = 1;

  std::uint64_t clock_ = 0;
  std::uint64_t mutation_count_ = 0;
  std::map<std::string, int> expected_items_;
};

}  // namespace causeway
