#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#include "divnav/remote.hpp"

#include <httplib.h>
#include <json.hpp>

using namespace divnav;
using nlohmann::json;

namespace {

// Serves canned handlers on a free port for the duration of one test.
class TestServer {
 public:
  TestServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& handle() { return server_; }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_;
  std::thread thread_;
};

RemoteConfig config_for(const TestServer& s, int retries = 0) {
  RemoteConfig c;
  c.endpoint = s.endpoint();
  c.max_retries = retries;
  c.timeout_s = 5;
  return c;
}

std::string unit_vector_json(int dim) {
  json v = json::array();
  v.push_back(1.0);
  for (int i = 1; i < dim; ++i) v.push_back(0.0);
  return json{{"embeddings", {v}}}.dump();
}

}  // namespace

TEST_CASE("remote embedder round-trips a unit embedding") {
  TestServer server;
  std::atomic<int> calls{0};
  server.handle().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    ++calls;
    const json body = json::parse(req.body);
    CHECK(body.at("texts").size() == 1);
    CHECK(body.at("texts")[0] == "plant");
    res.set_content(unit_vector_json(8), "application/json");
  });
  RemoteEmbedder embedder(config_for(server), 8);
  const Embedding e = embedder.embed_text("plant");
  CHECK(e.size() == 8);
  CHECK(e(0) == doctest::Approx(1.0));
  CHECK(calls == 1);
}

TEST_CASE("remote embedder rejects a wrong dimension") {
  TestServer server;
  server.handle().Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(unit_vector_json(4), "application/json");
  });
  RemoteEmbedder embedder(config_for(server), 8);
  CHECK_THROWS_AS(embedder.embed_text("plant"), ProviderContractError);
}

TEST_CASE("transport errors carry the attempt count after retries") {
  TestServer server;
  std::atomic<int> calls{0};
  server.handle().Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  });
  RemoteEmbedder embedder(config_for(server, /*retries=*/2), 8);
  try {
    embedder.embed_text("plant");
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.attempts == 3);  // first try + two retries
    CHECK(calls == 3);
  }
}

TEST_CASE("api key travels as a bearer token") {
  TestServer server;
  std::string seen_auth;
  server.handle().Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(unit_vector_json(8), "application/json");
  });
  RemoteConfig cfg = config_for(server);
  cfg.api_key = "sk-test";
  RemoteEmbedder embedder(cfg, 8);
  embedder.embed_text("plant");
  CHECK(seen_auth == "Bearer sk-test");
}

TEST_CASE("remote decomposition parses a valid chat response") {
  TestServer server;
  server.handle().Post("/v1/chat/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                         const json body = json::parse(req.body);
                         CHECK(body.at("messages")[0].at("content").get<std::string>().find(
                                   "the mug in the kitchen") != std::string::npos);
                         const json decomposition = {
                             {"primary", "mug"},
                             {"explicit_targets", {"mug", "kitchen"}},
                             {"inferred_targets", json::array()},
                             {"implicit_targets", json::array()},
                             {"relations",
                              {{{"kind", "in"}, {"subject", "kitchen"}}}},
                         };
                         const json response = {
                             {"choices",
                              {{{"message", {{"content", decomposition.dump()}}}}}}};
                         res.set_content(response.dump(), "application/json");
                       });
  const auto d = decompose_remote("the mug in the kitchen", config_for(server));
  CHECK(!d.remote_fallback);
  CHECK(d.primary == "mug");
  REQUIRE(d.relations.size() == 1);
  CHECK(d.relations[0].kind == RelationKind::In);
  CHECK(d.relations[0].object == "mug");
  CHECK(d.proximity_set == std::vector<std::string>{"mug", "kitchen"});
}

TEST_CASE("malformed remote decomposition falls back to the rules") {
  TestServer server;
  server.handle().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                         const json response = {
                             {"choices", {{{"message", {{"content", "not json at all"}}}}}}};
                         res.set_content(response.dump(), "application/json");
                       });
  const auto d = decompose_remote("the mug in the kitchen", config_for(server));
  CHECK(d.remote_fallback);
  CHECK(d.primary == "mug");  // rule-based result
  CHECK(!d.proximity_set.empty());
}

TEST_CASE("remote decomposition without a primary falls back") {
  TestServer server;
  server.handle().Post("/v1/chat/completions",
                       [&](const httplib::Request&, httplib::Response& res) {
                         const json inner = {{"explicit_targets", {"mug"}}};
                         const json response = {
                             {"choices", {{{"message", {{"content", inner.dump()}}}}}}};
                         res.set_content(response.dump(), "application/json");
                       });
  const auto d = decompose_remote("the mug", config_for(server));
  CHECK(d.remote_fallback);
  CHECK(d.primary == "mug");
}

TEST_CASE("unreachable decomposition endpoint falls back") {
  RemoteConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1";  // nothing listens here
  cfg.max_retries = 0;
  cfg.timeout_s = 1;
  const auto d = decompose_remote("the towel", cfg);
  CHECK(d.remote_fallback);
  CHECK(d.primary == "towel");
}

TEST_CASE("remote validator parses verdicts and schema") {
  TestServer server;
  server.handle().Post("/validate", [&](const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    CHECK(body.at("query") == "the mug in the kitchen");
    CHECK(body.at("primary") == "mug");
    CHECK(body.at("image").is_null());
    res.set_content(json{{"primary_present", true},
                         {"constraint_satisfied", true},
                         {"rationale", "looks right"}}
                        .dump(),
                    "application/json");
  });
  RemoteValidator v(config_for(server));
  ValidationContext ctx;
  ctx.nearby_labels = {"mug", "sink"};
  const auto verdict = v.validate(ctx, "the mug in the kitchen", "mug");
  CHECK(verdict.primary_present);
  CHECK(verdict.constraint_satisfied);
  CHECK(verdict.rationale == "looks right");
}

TEST_CASE("validator transport errors are unconfirmed, never success") {
  RemoteConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1";
  cfg.max_retries = 0;
  cfg.timeout_s = 1;
  RemoteValidator v(cfg);
  const auto verdict = v.validate(ValidationContext{}, "q", "p");
  CHECK(!verdict.primary_present);
  CHECK(!verdict.constraint_satisfied);
}

TEST_CASE("validator rejects a verdict violating the implication invariant") {
  TestServer server;
  server.handle().Post("/validate", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"primary_present", false}, {"constraint_satisfied", true}}.dump(),
                    "application/json");
  });
  RemoteValidator v(config_for(server));
  const auto verdict = v.validate(ValidationContext{}, "q", "p");
  // treated as unconfirmed, not taken at face value
  CHECK(!verdict.constraint_satisfied);
}

TEST_CASE("prompt templates match the shipped asset files") {
  // the in-binary templates and the editable assets must not drift apart
  CHECK(!decompose_prompt_template().empty());
  CHECK(!validate_prompt_template().empty());
  CHECK(decompose_prompt_template().find("primary") != std::string::npos);
  CHECK(validate_prompt_template().find("constraint_satisfied") != std::string::npos);
}
