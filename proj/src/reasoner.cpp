#include "causeway/reasoner.hpp"

#include <cstdlib>
#include <semaphore>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace causeway {

using Json = nlohmann::ordered_json;

VerdictDistribution RuleReasoner::query(const DependencyQuery& q) {
  if (q.first.id == q.second.id) {
    throw Error(ErrorCode::IdenticalPair, "subtask " + std::to_string(q.first.id));
  }
  std::vector<int> asserting_pq;
  std::vector<int> asserting_qp;
  for (std::size_t i = 1; i <= q.rules.size(); ++i) {
    const Rule& rule = q.rules.rule(static_cast<int>(i));
    Verdict v = engine_.evaluate(rule, q.first, q.second, q.rules.polarity_of(static_cast<int>(i)));
    if (v == Verdict::EdgePQ) asserting_pq.push_back(rule.id);
    if (v == Verdict::EdgeQP) asserting_qp.push_back(rule.id);
  }

  VerdictDistribution dist;
  if (asserting_pq.empty() && asserting_qp.empty()) {
    dist.p_no_edge = 1.0;
    return dist;
  }
  if (!asserting_pq.empty() && !asserting_qp.empty()) {
    // Directed verdicts disagree; the lowest-id rule wins.
    std::ostringstream os;
    os << "conflicting verdicts on pair (" << q.first.id << "," << q.second.id << "): rules";
    for (int id : asserting_pq) os << " " << id << "->pq";
    for (int id : asserting_qp) os << " " << id << "->qp";
    conflicts_.push_back(os.str());
    if (asserting_pq.front() < asserting_qp.front()) {
      dist.p_edge_pq = 1.0;
      dist.supporting_rules = asserting_pq;
    } else {
      dist.p_edge_qp = 1.0;
      dist.supporting_rules = asserting_qp;
    }
    return dist;
  }
  if (!asserting_pq.empty()) {
    dist.p_edge_pq = 1.0;
    dist.supporting_rules = asserting_pq;
  } else {
    dist.p_edge_qp = 1.0;
    dist.supporting_rules = asserting_qp;
  }
  return dist;
}

namespace {

Json subtask_brief(const Subtask& s) {
  Json j;
  j["id"] = s.id;
  j["description"] = s.description;
  j["action"] = to_string(s.action.kind);
  if (!s.action.item.empty()) j["item"] = s.action.item;
  if (s.action.pos) j["pos"] = {s.action.pos->x, s.action.pos->y, s.action.pos->z};
  return j;
}

struct ParsedEndpoint {
  std::string base;  // scheme://host:port
  std::string path;
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  std::size_t path_start =
      endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/v1/chat/completions"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

// Models wrap JSON in prose often enough that we cut from the first brace to
// the last and try that.
std::optional<Json> extract_json(const std::string& text) {
  auto first = text.find_first_of('{');
  auto last = text.find_last_of('}');
  if (first == std::string::npos || last == std::string::npos || last < first) return std::nullopt;
  Json parsed = Json::parse(text.substr(first, last - first + 1), nullptr, false);
  if (parsed.is_discarded()) return std::nullopt;
  return parsed;
}

}  // namespace

struct RemoteReasoner::Transport {
  Transport(const RemoteReasonerConfig& config)
      : parsed(split_endpoint(config.endpoint)),
        client(parsed.base),
        slots(config.max_in_flight > 0 ? config.max_in_flight : 1) {
    client.set_connection_timeout(0, config.timeout_ms * 1000);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
  }

  ParsedEndpoint parsed;
  httplib::Client client;
  std::counting_semaphore<64> slots;
};

RemoteReasoner::RemoteReasoner(RemoteReasonerConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) {
    throw Error(ErrorCode::RemoteUnavailable, "no endpoint configured");
  }
  transport_ = std::make_unique<Transport>(config_);
}

RemoteReasoner::~RemoteReasoner() = default;

std::string RemoteReasoner::dependency_prompt(const DependencyQuery& q) {
  std::ostringstream os;
  os << "You are organizing subtasks for a small team of Minecraft bots.\n";
  os << "Subtask nodes:\n";
  os << subtask_brief(q.first).dump() << "\n";
  os << subtask_brief(q.second).dump() << "\n";
  os << "Important notice:\n";
  for (std::size_t i = 1; i <= q.rules.size(); ++i) {
    const Rule& rule = q.rules.rule(static_cast<int>(i));
    bool flipped = q.rules.polarity_of(static_cast<int>(i)) == Polarity::Counterfactual;
    os << i << ". " << (flipped ? rule.counterfactual_statement : rule.statement) << "\n";
  }
  os << "Given the rules, decide whether one node must be completed before the other.\n";
  os << "Answer with JSON only: {\"causal effect\": [{\"chosen_node\": <id>, \"target_node\": "
        "<id>}]} where chosen_node must run before target_node. Use an empty list when the "
        "nodes are independent.";
  return os.str();
}

std::vector<std::string> RemoteReasoner::sample_completions(const std::string& prompt, int n) {
  Json request;
  request["model"] = config_.model;
  request["n"] = n;
  request["messages"] = Json::array({Json{{"role", "user"}, {"content", prompt}}});

  transport_->slots.acquire();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto res = transport_->client.Post(transport_->parsed.path, headers, request.dump(),
                                     "application/json");
  transport_->slots.release();

  if (!res || res->status != 200) {
    throw Error(ErrorCode::RemoteUnavailable,
                config_.endpoint + " status " + (res ? std::to_string(res->status) : "none"));
  }
  Json body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("choices")) {
    throw Error(ErrorCode::RemoteUnavailable, "malformed completion envelope");
  }
  std::vector<std::string> out;
  for (const auto& choice : body["choices"]) {
    out.push_back(choice.value("message", Json::object()).value("content", ""));
  }
  return out;
}

VerdictDistribution RemoteReasoner::query(const DependencyQuery& q) {
  if (q.first.id == q.second.id) {
    throw Error(ErrorCode::IdenticalPair, "subtask " + std::to_string(q.first.id));
  }
  int samples = q.samples > 0 ? q.samples : config_.samples;
  std::string prompt = dependency_prompt(q);
  std::uint64_t key = fnv1a(prompt) ^ static_cast<std::uint64_t>(samples);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++cache_hits_;
      return it->second;
    }
  }

  auto verdict_of = [&](const std::string& content) -> std::optional<Verdict> {
    auto parsed = extract_json(content);
    if (!parsed || !parsed->contains("causal effect") || !(*parsed)["causal effect"].is_array()) {
      return std::nullopt;
    }
    for (const auto& entry : (*parsed)["causal effect"]) {
      int chosen = entry.value("chosen_node", -1);
      int target = entry.value("target_node", -1);
      if (chosen == q.first.id && target == q.second.id) return Verdict::EdgePQ;
      if (chosen == q.second.id && target == q.first.id) return Verdict::EdgeQP;
    }
    return Verdict::NoEdge;
  };

  int pq = 0, qp = 0, none = 0;
  auto contents = sample_completions(prompt, samples);
  for (const auto& content : contents) {
    auto v = verdict_of(content);
    if (!v) {
      // One resample for an unparseable body, then give up on the sample.
      auto retry = sample_completions(prompt, 1);
      v = retry.empty() ? std::nullopt : verdict_of(retry.front());
      if (!v) v = Verdict::NoEdge;
    }
    if (*v == Verdict::EdgePQ) ++pq;
    else if (*v == Verdict::EdgeQP) ++qp;
    else ++none;
  }
  int total = pq + qp + none;
  if (total == 0) total = 1, none = 1;

  VerdictDistribution dist;
  dist.p_edge_pq = static_cast<double>(pq) / total;
  dist.p_edge_qp = static_cast<double>(qp) / total;
  dist.p_no_edge = static_cast<double>(none) / total;

  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_[key] = dist;
  return dist;
}

std::optional<std::string> RemoteReasoner::complete(const std::string& prompt) {
  auto contents = sample_completions(prompt, 1);
  if (contents.empty()) return std::nullopt;
  return contents.front();
}

std::unique_ptr<RemoteReasoner> remote_reasoner_from_env() {
  const char* endpoint = std::getenv("REASONER_ENDPOINT");
  if (!endpoint || !*endpoint) return nullptr;
  RemoteReasonerConfig config;
  config.endpoint = endpoint;
  if (const char* key = std::getenv("REASONER_API_KEY")) config.api_key = key;
  return std::make_unique<RemoteReasoner>(std::move(config));
}

}  // namespace causeway
