#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "causeway/rules.hpp"

namespace causeway {

struct VerdictDistribution {
  double p_edge_pq = 0.0;
  double p_edge_qp = 0.0;
  double p_no_edge = 0.0;
  // Rules asserting the dominant direction; empty for remote reasoners.
  std::vector<int> supporting_rules;

  bool normalized(double tol = 1e-9) const {
    return std::abs(p_edge_pq + p_edge_qp + p_no_edge - 1.0) <= tol;
  }
};

struct DependencyQuery {
  InterventionSet rules;
  Subtask first;
  Subtask second;
  int samples = 1;
};

// Answers "must one of these two subtasks precede the other".
class Reasoner {
 public:
  virtual ~Reasoner() = default;

  // Throws IdenticalPair when both subtasks share an id.
  virtual VerdictDistribution query(const DependencyQuery& q) = 0;

  virtual bool deterministic() const = 0;
  virtual int default_samples() const { return 1; }

  // Free-form completion used by goal decomposition in remote mode; the
  // rule-grounded reasoner has no generative channel.
  virtual std::optional<std::string> complete(const std::string&) { return std::nullopt; }

  // Recipe/loot context when the reasoner is rule-grounded.
  virtual const RuleEngine* engine() const { return nullptr; }
};

// Deterministic point-mass reasoner: combines the verdicts of every rule in
// the effective set. Conflicting directions resolve to the lowest rule id.
class RuleReasoner final : public Reasoner {
 public:
  RuleReasoner() = default;
  explicit RuleReasoner(RuleEngine engine) : engine_(std::move(engine)) {}

  VerdictDistribution query(const DependencyQuery& q) override;
  bool deterministic() const override { return true; }
  const RuleEngine* engine() const override { return &engine_; }

  const std::vector<std::string>& conflict_log() const { return conflicts_; }

 private:
  RuleEngine engine_;
  std::vector<std::string> conflicts_;
};

struct RemoteReasonerConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/chat/completions
  std::string api_key;
  std::string model = "gpt-4o";
  int samples = 3;
  int max_in_flight = 4;
  int timeout_ms = 30000;
};

// Chat-completion backed reasoner. Responses are cached per run; a sample
// whose body fails to parse is retried once and then counted as NoEdge.
class RemoteReasoner final : public Reasoner {
 public:
  explicit RemoteReasoner(RemoteReasonerConfig config);
  ~RemoteReasoner() override;

  VerdictDistribution query(const DependencyQuery& q) override;
  bool deterministic() const override { return false; }
  int default_samples() const override { return config_.samples; }
  std::optional<std::string> complete(const std::string& prompt) override;

  static std::string dependency_prompt(const DependencyQuery& q);

  std::size_t cache_hits() const { return cache_hits_; }

 private:
  struct Transport;

  std::vector<std::string> sample_completions(const std::string& prompt, int n);

  RemoteReasonerConfig config_;
  std::unique_ptr<Transport> transport_;
  std::mutex cache_mutex_;
  std::map<std::uint64_t, VerdictDistribution> cache_;
  std::size_t cache_hits_ = 0;
};

// Reads REASONER_ENDPOINT / REASONER_API_KEY; nullptr when unset.
std::unique_ptr<RemoteReasoner> remote_reasoner_from_env();

}  // namespace causeway
