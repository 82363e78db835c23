#include "doctest.h"

#include <cstdlib>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "causeway/agent.hpp"
#include "causeway/common.hpp"
#include "causeway/engine.hpp"
#include "causeway/reasoner.hpp"
#include "causeway/scenario.hpp"
#include "causeway/world.hpp"

using namespace causeway;
using Json = nlohmann::ordered_json;

namespace {

// Chat-completion envelope with one choice per content string.
std::string envelope(const std::vector<std::string>& contents) {
  Json body;
  body["choices"] = Json::array();
  for (const auto& content : contents) {
    body["choices"].push_back(Json{{"message", Json{{"content", content}}}});
  }
  return body.dump();
}

// Loopback chat-completion server. Tests swap `respond` to script replies
// and inspect `requests` afterwards.
struct MockServer {
  struct Seen {
    std::string path;
    std::string auth;
    Json body;
  };

  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::mutex mutex;
  std::vector<Seen> requests;
  std::function<std::pair<int, std::string>(const Json&)> respond;

  MockServer() {
    respond = [](const Json&) { return std::make_pair(200, envelope({""})); };
    server.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      std::pair<int, std::string> reply;
      {
        std::lock_guard<std::mutex> lock(mutex);
        requests.push_back({req.path, req.get_header_value("Authorization"),
                            Json::parse(req.body, nullptr, false)});
        reply = respond(requests.back().body);
      }
      res.status = reply.first;
      res.set_content(reply.second, "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~MockServer() {
    server.stop();
    thread.join();
  }

  std::string base() const { return "http://127.0.0.1:" + std::to_string(port); }
  std::string endpoint() const { return base() + "/v1/chat/completions"; }

  std::size_t request_count() {
    std::lock_guard<std::mutex> lock(mutex);
    return requests.size();
  }

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;
};

RemoteReasonerConfig config_for(const MockServer& mock, int samples = 1) {
  RemoteReasonerConfig config;
  config.endpoint = mock.endpoint();
  config.samples = samples;
  config.timeout_ms = 2000;
  return config;
}

Subtask make_subtask(int id, const std::string& description, ActionKind kind,
                     const std::string& item) {
  Subtask s;
  s.id = id;
  s.description = description;
  s.action.kind = kind;
  s.action.item = item;
  return s;
}

DependencyQuery make_query(int samples = 1) {
  DependencyQuery q;
  q.rules = no_intervention(builtin_rules());
  q.first = make_subtask(1, "withdraw 4 stone from chest (6,1,0)", ActionKind::WithdrawItem,
                         "stone");
  q.second = make_subtask(2, "place stone at (3,1,0)", ActionKind::PlaceBlock, "stone");
  q.samples = samples;
  return q;
}

std::string edge_reply(int chosen, int target) {
  Json body;
  body["causal effect"] = Json::array({Json{{"chosen_node", chosen}, {"target_node", target}}});
  return body.dump();
}

}  // namespace

TEST_CASE("the dependency prompt names both subtasks and every rule") {
  DependencyQuery q = make_query();
  std::string prompt = RemoteReasoner::dependency_prompt(q);

  CHECK(prompt.find("withdraw 4 stone") != std::string::npos);
  CHECK(prompt.find("place stone at (3,1,0)") != std::string::npos);
  for (std::size_t i = 1; i <= q.rules.size(); ++i) {
    CHECK(prompt.find(q.rules.rule(static_cast<int>(i)).statement) != std::string::npos);
  }
  CHECK(prompt.find("causal effect") != std::string::npos);
  CHECK(prompt.find("chosen_node") != std::string::npos);

  SUBCASE("an intervention swaps in the counterfactual reading") {
    q.rules = intervene(builtin_rules(), 3);
    std::string flipped = RemoteReasoner::dependency_prompt(q);
    CHECK(flipped.find("You can place something even if you have not equipped it.") !=
          std::string::npos);
    CHECK(flipped.find("You can not place something if you have not equipped it.") ==
          std::string::npos);
    // The other four rules keep their normal statements.
    CHECK(flipped.find(q.rules.rule(1).statement) != std::string::npos);
    CHECK(flipped != prompt);
  }
}

TEST_CASE("query turns sampled completions into a verdict distribution") {
  MockServer mock;
  mock.respond = [](const Json&) {
    return std::make_pair(
        200, envelope({edge_reply(1, 2), edge_reply(1, 2), R"({"causal effect": []})"}));
  };

  RemoteReasoner reasoner(config_for(mock, 3));
  CHECK_FALSE(reasoner.deterministic());
  CHECK(reasoner.default_samples() == 3);

  VerdictDistribution dist = reasoner.query(make_query(3));
  CHECK(dist.p_edge_pq == 2.0 / 3.0);
  CHECK(dist.p_edge_qp == 0.0);
  CHECK(dist.p_no_edge == 1.0 / 3.0);
  CHECK(dist.normalized());
  CHECK(dist.supporting_rules.empty());

  REQUIRE(mock.request_count() == 1);
  const Json& body = mock.requests.front().body;
  CHECK(body["model"] == "gpt-4o");
  CHECK(body["n"] == 3);
  REQUIRE(body["messages"].is_array());
  CHECK(body["messages"][0]["role"] == "user");
  std::string sent = body["messages"][0]["content"].get<std::string>();
  CHECK(sent == RemoteReasoner::dependency_prompt(make_query(3)));
}

TEST_CASE("chatter around the reply JSON still parses") {
  MockServer mock;
  mock.respond = [](const Json&) {
    return std::make_pair(
        200, envelope({"Sure thing! " + edge_reply(2, 1) + " Let me know if you need more."}));
  };

  RemoteReasoner reasoner(config_for(mock));
  VerdictDistribution dist = reasoner.query(make_query());
  CHECK(dist.p_edge_qp == 1.0);
  CHECK(dist.p_edge_pq == 0.0);
}

TEST_CASE("an edge claim about other nodes counts as independence") {
  MockServer mock;
  mock.respond = [](const Json&) { return std::make_pair(200, envelope({edge_reply(7, 9)})); };

  RemoteReasoner reasoner(config_for(mock));
  VerdictDistribution dist = reasoner.query(make_query());
  CHECK(dist.p_no_edge == 1.0);
}

TEST_CASE("an unparseable sample is retried once") {
  MockServer mock;

  SUBCASE("a clean retry supplies the verdict") {
    int calls = 0;
    mock.respond = [&calls](const Json&) {
      ++calls;
      if (calls == 1) return std::make_pair(200, envelope({"no json in here"}));
      return std::make_pair(200, envelope({edge_reply(1, 2)}));
    };
    RemoteReasoner reasoner(config_for(mock));
    VerdictDistribution dist = reasoner.query(make_query());
    CHECK(dist.p_edge_pq == 1.0);
    CHECK(mock.request_count() == 2);
  }

  SUBCASE("two failures score the sample as no-edge") {
    mock.respond = [](const Json&) { return std::make_pair(200, envelope({"still not json"})); };
    RemoteReasoner reasoner(config_for(mock));
    VerdictDistribution dist = reasoner.query(make_query());
    CHECK(dist.p_no_edge == 1.0);
    CHECK(mock.request_count() == 2);
  }
}

TEST_CASE("repeated queries are served from the cache") {
  MockServer mock;
  mock.respond = [](const Json&) {
    return std::make_pair(200, envelope({edge_reply(1, 2), edge_reply(1, 2)}));
  };

  RemoteReasoner reasoner(config_for(mock, 2));
  VerdictDistribution first = reasoner.query(make_query(2));
  VerdictDistribution second = reasoner.query(make_query(2));

  CHECK(first.p_edge_pq == second.p_edge_pq);
  CHECK(reasoner.cache_hits() == 1);
  CHECK(mock.request_count() == 1);

  // A different sample count is a different question.
  mock.respond = [](const Json&) { return std::make_pair(200, envelope({edge_reply(1, 2)})); };
  reasoner.query(make_query(1));
  CHECK(reasoner.cache_hits() == 1);
  CHECK(mock.request_count() == 2);
}

TEST_CASE("transport failures surface as remote_unavailable") {
  SUBCASE("an error status") {
    MockServer mock;
    mock.respond = [](const Json&) { return std::make_pair(500, std::string("{}")); };
    RemoteReasoner reasoner(config_for(mock));
    try {
      reasoner.query(make_query());
      FAIL_CHECK("queried through a 500 response");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RemoteUnavailable);
      CHECK(std::string(e.what()).find("500") != std::string::npos);
    }
  }

  SUBCASE("a malformed completion envelope") {
    MockServer mock;
    mock.respond = [](const Json&) { return std::make_pair(200, std::string(R"({"nope": 1})")); };
    RemoteReasoner reasoner(config_for(mock));
    try {
      reasoner.query(make_query());
      FAIL_CHECK("accepted an envelope without choices");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RemoteUnavailable);
      CHECK(std::string(e.what()).find("malformed") != std::string::npos);
    }
  }

  SUBCASE("nobody listening") {
    RemoteReasonerConfig config;
    config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
    config.timeout_ms = 500;
    RemoteReasoner reasoner(config);
    try {
      reasoner.query(make_query());
      FAIL_CHECK("reached a closed port");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RemoteUnavailable);
    }
  }

  SUBCASE("no endpoint configured") {
    try {
      RemoteReasoner reasoner(RemoteReasonerConfig{});
      FAIL_CHECK("constructed without an endpoint");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RemoteUnavailable);
    }
  }
}

TEST_CASE("complete returns the raw reply text") {
  MockServer mock;
  mock.respond = [](const Json&) { return std::make_pair(200, envelope({"use the furnace"})); };

  RemoteReasoner reasoner(config_for(mock));
  auto reply = reasoner.complete("how do I cook beef?");
  REQUIRE(reply.has_value());
  CHECK(*reply == "use the furnace");
  CHECK(mock.requests.front().body["n"] == 1);

  SUBCASE("no choices means no completion") {
    mock.respond = [](const Json&) { return std::make_pair(200, std::string(R"({"choices": []})")); };
    CHECK_FALSE(reasoner.complete("anything").has_value());
  }
}

TEST_CASE("endpoint paths and credentials reach the wire") {
  MockServer mock;
  mock.respond = [](const Json&) { return std::make_pair(200, envelope({"ok"})); };

  SUBCASE("a custom path is used verbatim") {
    RemoteReasonerConfig config;
    config.endpoint = mock.base() + "/llm/api";
    RemoteReasoner reasoner(config);
    reasoner.complete("ping");
    CHECK(mock.requests.front().path == "/llm/api");
  }

  SUBCASE("a bare host falls back to the chat-completions path") {
    RemoteReasonerConfig config;
    config.endpoint = mock.base();
    RemoteReasoner reasoner(config);
    reasoner.complete("ping");
    CHECK(mock.requests.front().path == "/v1/chat/completions");
  }

  SUBCASE("the api key rides in the authorization header") {
    RemoteReasonerConfig config = config_for(mock);
    config.api_key = "sesame";
    RemoteReasoner reasoner(config);
    reasoner.complete("ping");
    CHECK(mock.requests.front().auth == "Bearer sesame");
  }
}

TEST_CASE("identical subtask ids are rejected before any call") {
  MockServer mock;
  RemoteReasoner reasoner(config_for(mock));
  DependencyQuery q = make_query();
  q.second.id = q.first.id;
  CHECK_THROWS_AS(reasoner.query(q), Error);
  CHECK(mock.request_count() == 0);
}

TEST_CASE("remote_reasoner_from_env requires the endpoint variable") {
  unsetenv("REASONER_ENDPOINT");
  unsetenv("REASONER_API_KEY");
  CHECK(remote_reasoner_from_env() == nullptr);

  MockServer mock;
  mock.respond = [](const Json&) { return std::make_pair(200, envelope({"pong"})); };
  setenv("REASONER_ENDPOINT", mock.endpoint().c_str(), 1);
  setenv("REASONER_API_KEY", "from-env", 1);
  auto reasoner = remote_reasoner_from_env();
  REQUIRE(reasoner != nullptr);
  auto reply = reasoner->complete("ping");
  REQUIRE(reply.has_value());
  CHECK(*reply == "pong");
  CHECK(mock.requests.front().auth == "Bearer from-env");
  unsetenv("REASONER_ENDPOINT");
  unsetenv("REASONER_API_KEY");
}

TEST_CASE("the remote policy turns endpoint replies into actions") {
  World world;
  world.fill_blocks({-4, 0, -4}, {4, 0, 4}, "dirt");
  world.set_block({2, 1, 2}, "log");
  world.add_agent(0, {0, 1, 0});

  Subtask subtask = make_subtask(1, "mine the log", ActionKind::MineBlock, "log");
  subtask.action.pos = Vec3{2, 1, 2};
  subtask.post = {PostKind::AgentHasItem, {}, "log", 1, false};

  AgentMemory memory;
  memory.reset_for_subtask(world);

  MockServer mock;
  RemoteReasoner reasoner(config_for(mock));
  RemotePolicy policy(reasoner);
  CHECK(std::string(policy.name()) == "remote");

  SUBCASE("a parseable reply is executed as sent") {
    mock.respond = [](const Json&) {
      return std::make_pair(200, envelope({R"(On it! {"action": "mine_block", "pos": [2, 1, 2]})"}));
    };
    ActionSpec action = policy.next_action(world, 0, subtask, memory);
    CHECK(action.kind == ActionKind::MineBlock);
    REQUIRE(action.pos.has_value());
    CHECK(*action.pos == Vec3{2, 1, 2});

    std::string prompt =
        mock.requests.front().body["messages"][0]["content"].get<std::string>();
    CHECK(prompt.find("mine the log") != std::string::npos);
    CHECK(prompt.find("Observation") != std::string::npos);

    ActionResult result = world.apply(0, action);
    CHECK(result.ok);
  }

  SUBCASE("an unparseable reply falls back to the scripted pipeline") {
    mock.respond = [](const Json&) { return std::make_pair(200, envelope({"just dig it up"})); };
    ActionSpec action = policy.next_action(world, 0, subtask, memory);
    ScriptedPolicy scripted;
    AgentMemory fresh;
    fresh.reset_for_subtask(world);
    ActionSpec expected = scripted.next_action(world, 0, subtask, fresh);
    CHECK(action.kind == expected.kind);
  }
}

TEST_CASE("a full episode runs against the mock endpoint") {
  MockServer mock;
  // Dependency prompts quoting a counterfactual rule contain "even if";
  // answering those with independence and the rest with the true edge makes
  // every per-rule contrast land on the same kept verdict.
  mock.respond = [](const Json& body) {
    std::string prompt = body["messages"][0]["content"].get<std::string>();
    if (prompt.find("even if") != std::string::npos) {
      return std::make_pair(200, envelope({R"({"causal effect": []})"}));
    }
    if (prompt.find("Decompose this goal") != std::string::npos) {
      return std::make_pair(
          200, envelope({R"([{"id": 1, "description": "mine the log",)"
                         R"( "step": {"action": "mine_block", "item": "log", "pos": [3, 1, 2]}},)"
                         R"( {"id": 2, "description": "craft planks from the log",)"
                         R"( "step": {"action": "craft", "item": "planks", "amount": 1}}])"}));
    }
    if (prompt.find("chosen_node") != std::string::npos) {
      return std::make_pair(200, envelope({edge_reply(1, 2)}));
    }
    // Action prompts from the remote policy: stay silent, let the scripted
    // fallback do the work.
    return std::make_pair(200, envelope({"hmm"}));
  };

  RemoteReasoner reasoner(config_for(mock));
  std::string dir = CAUSEWAY_SCENARIO_DIR;
  Scenario scenario = load_scenario(dir + "/gathering.json");

  EngineConfig config;
  config.seed = 7;
  config.policy = "remote";
  RunResult result = run_scenario(scenario, config, &reasoner);

  CHECK(result.success);
  CHECK(result.metrics.at("completion") == 1.0);
  CHECK(result.g_refined.has_edge(1, 2));
  CHECK(mock.request_count() > 0);
}
