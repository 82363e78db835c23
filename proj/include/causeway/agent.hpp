#pragma once

#include <deque>
#include <optional>
#include <string>

#include "causeway/reasoner.hpp"
#include "causeway/task.hpp"
#include "causeway/world.hpp"

namespace causeway {

enum class ReflectOutcome { Continue, Complete, Stuck };

const char* to_string(ReflectOutcome outcome);

// Per-agent scratch state carried across ticks while one subtask runs.
struct AgentMemory {
  static constexpr std::size_t kLogCap = 64;
  // Actions one subtask attempt may consume before it counts as stuck; stops
  // pipelines that succeed at every step yet never reach the postcondition.
  static constexpr int kActionBudget = 24;

  int consecutive_failures = 0;
  int actions_on_subtask = 0;
  std::uint64_t mutations_at_last_progress = 0;
  bool last_ok = false;
  std::optional<ActionKind> last_kind;
  std::deque<std::string> action_log;

  void note(const std::string& line);
  void reset_for_subtask(const World& world);
};

// Updates failure counters and the action log after an apply(). A success or
// any world mutation (someone is making progress) clears the failure streak.
void record_result(AgentMemory& memory, const World& world, const ActionSpec& spec,
                   const ActionResult& result);

// One line per finished subtask for traces and logs.
std::string subtask_summary(int agent_id, const Subtask& subtask, ReflectOutcome outcome,
                            const AgentMemory& memory);

// Best-effort parse of a chat-completion reply into a primitive action.
std::optional<ActionSpec> parse_action_json(const std::string& text);

class Policy {
 public:
  virtual ~Policy() = default;

  // The next primitive action that moves the subtask forward, derived from
  // current world state every call (no hidden cursor to corrupt).
  virtual ActionSpec next_action(const World& world, int agent_id, const Subtask& subtask,
                                 AgentMemory& memory) = 0;

  // Complete only when the explicit postcondition holds; Stuck after three
  // consecutive failed actions with no world progress in between.
  virtual ReflectOutcome reflect(const World& world, int agent_id, const Subtask& subtask,
                                 const AgentMemory& memory) = 0;

  virtual const char* name() const = 0;
};

// Hand-written recovery pipelines per action kind: fetch missing materials
// from the recorded sources, equip before placing, navigate when out of
// reach, then perform the subtask's own action.
class ScriptedPolicy final : public Policy {
 public:
  ActionSpec next_action(const World& world, int agent_id, const Subtask& subtask,
                         AgentMemory& memory) override;
  ReflectOutcome reflect(const World& world, int agent_id, const Subtask& subtask,
                         const AgentMemory& memory) override;
  const char* name() const override { return "scripted"; }
};

// Asks a remote reasoner for each action; falls back to the scripted
// pipeline when the reply does not parse. Reflection stays local so runs
// always terminate.
class RemotePolicy final : public Policy {
 public:
  explicit RemotePolicy(Reasoner& reasoner) : reasoner_(reasoner) {}

  ActionSpec next_action(const World& world, int agent_id, const Subtask& subtask,
                         AgentMemory& memory) override;
  ReflectOutcome reflect(const World& world, int agent_id, const Subtask& subtask,
                         const AgentMemory& memory) override;
  const char* name() const override { return "remote"; }

 private:
  Reasoner& reasoner_;
  ScriptedPolicy fallback_;
};

}  // namespace causeway
