#include "causeway/rules.hpp"

namespace causeway {

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::EdgePQ: return "edge_pq";
    case Verdict::EdgeQP: return "edge_qp";
    case Verdict::NoEdge: return "no_edge";
    case Verdict::NotCovered: return "not_covered";
  }
  return "?";
}

RecipeBook default_recipes() {
  RecipeBook book;
  book["planks"] = {{{"log", 1}}, 4, false, false, 0};
  book["stick"] = {{{"planks", 2}}, 4, false, false, 0};
  book["crafting_table"] = {{{"planks", 4}}, 1, false, false, 0};
  book["wooden_pickaxe"] = {{{"planks", 3}, {"stick", 2}}, 1, true, false, 0};
  book["stone_pickaxe"] = {{{"cobblestone", 3}, {"stick", 2}}, 1, true, false, 0};
  book["furnace"] = {{{"cobblestone", 8}}, 1, true, false, 0};
  book["bread"] = {{{"wheat", 3}}, 1, true, false, 0};
  book["cake"] = {{{"wheat", 3}, {"milk_bucket", 1}, {"egg", 1}}, 1, true, false, 0};
  book["iron_ingot"] = {{{"iron_ore", 1}}, 1, false, true, 1};
  book["cooked_beef"] = {{{"beef", 1}}, 1, false, true, 1};
  return book;
}

LootTable default_loot() {
  LootTable loot;
  loot["cow"] = {{{"beef", 1}}, ""};
  loot["sheep"] = {{{"mutton", 1}}, ""};
  loot["chicken"] = {{{"raw_chicken", 1}}, ""};
  loot["stone"] = {{{"cobblestone", 1}}, "wooden_pickaxe"};
  loot["iron_ore"] = {{{"iron_ore", 1}}, "stone_pickaxe"};
  return loot;
}

std::vector<UseRule> default_use_rules() {
  return {
      {"bucket", "cow", {{"milk_bucket", 1}}, true},
      {"shears", "sheep", {{"wool", 1}}, false},
  };
}

InterventionSet no_intervention(RuleSet base) { return {std::move(base), 0}; }

InterventionSet intervene(RuleSet base, int index_1based) {
  if (index_1based < 1 || static_cast<std::size_t>(index_1based) > base.size()) {
    throw Error(ErrorCode::IndexOutOfRange,
                "intervention index " + std::to_string(index_1based) + " of " +
                    std::to_string(base.size()));
  }
  return {std::move(base), index_1based};
}

RuleSet builtin_rules() {
  RuleSet set;
  set.rules = {
      {1, "You must have a block before you place it.",
       "You can place a block even if you do not have it.",
       PredicateKind::PossessionBeforePlacement,
       {}},
      {2, "You can not place or use something unless you get it from the container first.",
       "You can place or use something even if you did not get it from the container first.",
       PredicateKind::RetrievalBeforeUse,
       {}},
      {3, "You can not place something if you have not equipped it.",
       "You can place something even if you have not equipped it.",
       PredicateKind::EquipBeforePlace,
       {}},
      {4,
       "The block at the lower place should be placed first, and the block at the higher "
       "place should be placed later.",
       "Blocks may be placed in any vertical order.",
       PredicateKind::LowerBlocksFirst,
       {}},
      {5, "You can not craft or smelt something unless you have all of its ingredients.",
       "You can craft or smelt something even if you do not have its ingredients.",
       PredicateKind::CraftRequiresIngredients,
       {}},
  };
  return set;
}

RuleEngine::RuleEngine()
    : RuleEngine(default_recipes(), default_loot(), default_use_rules()) {}

RuleEngine::RuleEngine(RecipeBook recipes, LootTable loot, std::vector<UseRule> use_rules)
    : recipes_(std::move(recipes)), loot_(std::move(loot)), use_rules_(std::move(use_rules)) {}

namespace {

bool is_acquire_kind(ActionKind kind) {
  return kind == ActionKind::WithdrawItem || kind == ActionKind::MineBlock ||
         kind == ActionKind::Craft || kind == ActionKind::Smelt;
}

bool is_producer_kind(ActionKind kind) {
  return is_acquire_kind(kind) || kind == ActionKind::Attack || kind == ActionKind::UseOn ||
         kind == ActionKind::CheckContainer;
}

// Action kinds a rule's statement speaks about. A pair is covered when the
// rule mentions at least one of its two kinds.
std::set<ActionKind> mentioned_kinds(const Rule& rule) {
  switch (rule.predicate) {
    case PredicateKind::PossessionBeforePlacement:
      return {ActionKind::WithdrawItem, ActionKind::MineBlock, ActionKind::Craft,
              ActionKind::Smelt, ActionKind::PlaceBlock};
    case PredicateKind::RetrievalBeforeUse:
      return {ActionKind::WithdrawItem, ActionKind::Equip, ActionKind::UseOn};
    case PredicateKind::EquipBeforePlace:
      return {ActionKind::Equip, ActionKind::PlaceBlock};
    case PredicateKind::LowerBlocksFirst:
      return {ActionKind::PlaceBlock};
    case PredicateKind::CraftRequiresIngredients:
      return {ActionKind::WithdrawItem, ActionKind::MineBlock, ActionKind::Craft,
              ActionKind::Smelt, ActionKind::Attack, ActionKind::UseOn,
              ActionKind::CheckContainer};
    case PredicateKind::ToggleLowerFirst:
      return {ActionKind::Toggle};
    case PredicateKind::KindOrder: {
      std::set<ActionKind> kinds;
      for (const auto& name : rule.params) {
        if (auto k = action_kind_from(name)) kinds.insert(*k);
      }
      return kinds;
    }
  }
  return {};
}

void require_param(bool present, const Rule& rule, const char* what, const Subtask& s) {
  if (!present) {
    throw Error(ErrorCode::MalformedActionSpec,
                std::string("rule ") + std::to_string(rule.id) + " needs " + what +
                    " on subtask " + std::to_string(s.id));
  }
}

}  // namespace

std::map<std::string, int> RuleEngine::produced_items(const Subtask& s) const {
  const ActionSpec& a = s.action;
  switch (a.kind) {
    case ActionKind::WithdrawItem:
      return a.item.empty() ? std::map<std::string, int>{} : std::map<std::string, int>{{a.item, a.amount}};
    case ActionKind::CheckContainer:
      // A stock verification makes the item available to whoever crafts with
      // it, even though the items stay in the chest until then.
      if (s.post.kind == PostKind::ContainerStocked && !s.post.item.empty()) {
        return {{s.post.item, s.post.count}};
      }
      return {};
    case ActionKind::Craft:
    case ActionKind::Smelt: {
      if (a.item.empty()) return {};
      int per = 1;
      if (auto it = recipes_.find(a.item); it != recipes_.end()) per = it->second.output_count;
      return {{a.item, per * a.amount}};
    }
    case ActionKind::MineBlock:
    case ActionKind::Attack: {
      if (a.item.empty()) return {};
      if (auto it = loot_.find(a.item); it != loot_.end()) return it->second.drops;
      return a.kind == ActionKind::MineBlock ? std::map<std::string, int>{{a.item, 1}}
                                             : std::map<std::string, int>{};
    }
    case ActionKind::UseOn: {
      for (const auto& u : use_rules_) {
        if (u.tool == a.tool && u.target == a.item) return u.produces;
      }
      return {};
    }
    default:
      return {};
  }
}

Verdict RuleEngine::normal_verdict(const Rule& rule, const Subtask& p, const Subtask& q) const {
  // Each helper answers "does p have to come before q"; callers try both
  // orders, so a single direction per check suffices.
  auto possession_first = [&](const Subtask& a, const Subtask& b) {
    if (!is_acquire_kind(a.action.kind) || b.action.kind != ActionKind::PlaceBlock) return false;
    require_param(!b.action.item.empty(), rule, "item", b);
    if (a.action.kind == ActionKind::WithdrawItem) require_param(!a.action.item.empty(), rule, "item", a);
    auto produced = produced_items(a);
    return produced.count(b.action.item) != 0;
  };
  auto retrieval_first = [&](const Subtask& a, const Subtask& b) {
    if (a.action.kind != ActionKind::WithdrawItem) return false;
    require_param(!a.action.item.empty(), rule, "item", a);
    if (b.action.kind == ActionKind::Equip) {
      require_param(!b.action.item.empty(), rule, "item", b);
      return b.action.item == a.action.item;
    }
    if (b.action.kind == ActionKind::UseOn) return !b.action.tool.empty() && b.action.tool == a.action.item;
    return false;
  };
  auto equip_first = [&](const Subtask& a, const Subtask& b) {
    if (a.action.kind != ActionKind::Equip || b.action.kind != ActionKind::PlaceBlock) return false;
    require_param(!a.action.item.empty(), rule, "item", a);
    require_param(!b.action.item.empty(), rule, "item", b);
    return a.action.item == b.action.item;
  };
  auto lower_place_first = [&](const Subtask& a, const Subtask& b) {
    if (a.action.kind != ActionKind::PlaceBlock || b.action.kind != ActionKind::PlaceBlock) return false;
    require_param(a.action.pos.has_value(), rule, "position", a);
    require_param(b.action.pos.has_value(), rule, "position", b);
    const Vec3& pa = *a.action.pos;
    const Vec3& pb = *b.action.pos;
    // Direct support only: same column, b one cell above a.
    return pa.x == pb.x && pa.z == pb.z && pb.y == pa.y + 1;
  };
  auto ingredient_first = [&](const Subtask& a, const Subtask& b) {
    if (!is_producer_kind(a.action.kind)) return false;
    if (b.action.kind != ActionKind::Craft && b.action.kind != ActionKind::Smelt) return false;
    require_param(!b.action.item.empty(), rule, "item", b);
    auto recipe = recipes_.find(b.action.item);
    if (recipe == recipes_.end()) return false;
    auto produced = produced_items(a);
    for (const auto& [item, _] : produced) {
      if (recipe->second.ingredients.count(item)) return true;
      if (!b.action.fuel.empty() && item == b.action.fuel) return true;
    }
    return false;
  };
  auto lower_toggle_first = [&](const Subtask& a, const Subtask& b) {
    if (a.action.kind != ActionKind::Toggle || b.action.kind != ActionKind::Toggle) return false;
    require_param(a.action.pos.has_value(), rule, "position", a);
    require_param(b.action.pos.has_value(), rule, "position", b);
    return a.action.pos->y < b.action.pos->y;
  };
  auto kind_order = [&](const Subtask& a, const Subtask& b) {
    if (rule.params.size() < 2) return false;
    auto before = action_kind_from(rule.params[0]);
    auto after = action_kind_from(rule.params[1]);
    if (!before || !after || *before == *after) return false;
    return a.action.kind == *before && b.action.kind == *after;
  };

  auto pick = [&](auto&& first_before_second) -> Verdict {
    if (first_before_second(p, q)) return Verdict::EdgePQ;
    if (first_before_second(q, p)) return Verdict::EdgeQP;
    return Verdict::NoEdge;
  };

  switch (rule.predicate) {
    case PredicateKind::PossessionBeforePlacement: return pick(possession_first);
    case PredicateKind::RetrievalBeforeUse: return pick(retrieval_first);
    case PredicateKind::EquipBeforePlace: return pick(equip_first);
    case PredicateKind::LowerBlocksFirst: return pick(lower_place_first);
    case PredicateKind::CraftRequiresIngredients: return pick(ingredient_first);
    case PredicateKind::ToggleLowerFirst: return pick(lower_toggle_first);
    case PredicateKind::KindOrder: return pick(kind_order);
  }
  return Verdict::NoEdge;
}

Verdict RuleEngine::evaluate(const Rule& rule, const Subtask& p, const Subtask& q,
                             Polarity polarity) const {
  auto mentioned = mentioned_kinds(rule);
  if (!mentioned.count(p.action.kind) && !mentioned.count(q.action.kind)) {
    return Verdict::NotCovered;  // coverage is polarity-invariant
  }
  Verdict verdict = normal_verdict(rule, p, q);
  if (polarity == Polarity::Counterfactual &&
      (verdict == Verdict::EdgePQ || verdict == Verdict::EdgeQP)) {
    // Lifting a constraint removes the dependency it asserted; it never
    // invents a new one.
    return Verdict::NoEdge;
  }
  return verdict;
}

}  // namespace causeway
