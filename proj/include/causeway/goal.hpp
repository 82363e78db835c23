#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causeway/common.hpp"
#include "causeway/task.hpp"

namespace causeway {

enum class GoalKind { Construction, Cooking, Escape, ItemGathering };

const char* to_string(GoalKind kind);
std::optional<GoalKind> goal_kind_from(std::string_view name);

struct BlueprintBlock {
  Vec3 pos;
  std::string kind;
  std::optional<std::string> facing;
};

enum class SourceKind { Container, Mine, Hunt };

struct IngredientSource {
  SourceKind kind = SourceKind::Container;
  std::optional<Vec3> pos;  // container or block position
  std::string entity;       // hunted entity kind
};

struct Ingredient {
  std::string item;
  int amount = 1;
  double score = 1.0;
  std::optional<IngredientSource> source;
};

struct RecipeStep {
  ActionKind kind = ActionKind::Craft;
  std::string item;
  int amount = 1;
  double score = 1.0;
  std::string fuel;
};

struct RecipeGoal {
  std::vector<Ingredient> ingredients;
  std::vector<RecipeStep> steps;
};

struct RoomCondition {
  Vec3 pos;
  bool desired = true;
};

struct Room {
  std::string name;
  double score = 1.0;
  std::vector<RoomCondition> conditions;
};

struct GatherTarget {
  std::string item;
  int amount = 1;
};

struct Goal {
  GoalKind kind = GoalKind::Construction;
  std::string description;
  std::vector<BlueprintBlock> blueprint;
  RecipeGoal recipe;
  std::vector<Room> rooms;
  GatherTarget target;
};

// What the planner may assume about the world before anybody moves.
struct EnvSummary {
  std::map<Vec3, std::map<std::string, int>> containers;
  std::vector<Vec3> crafting_tables;
  std::vector<Vec3> furnaces;
  std::vector<std::pair<std::string, Vec3>> entities;
  std::map<std::string, std::vector<Vec3>> blocks_by_kind;

  std::optional<Vec3> find_container_with(const std::string& item) const {
    for (const auto& [pos, items] : containers) {
      auto it = items.find(item);
      if (it != items.end() && it->second > 0) return pos;
    }
    return std::nullopt;
  }

  std::optional<Vec3> nearest_block(const std::string& kind) const {
    auto it = blocks_by_kind.find(kind);
    if (it == blocks_by_kind.end() || it->second.empty()) return std::nullopt;
    return it->second.front();
  }
};

}  // namespace causeway
