#include "divnav/remote.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

namespace divnav {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

// Splits "http://host:port/base" into client target + path prefix.
struct Endpoint {
  std::string host;  // scheme://host[:port]
  std::string base;  // path prefix, may be empty
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string base = url.substr(path_start);
  if (base == "/") base.clear();
  return {url.substr(0, path_start), base};
}

json post_json(const RemoteConfig& cfg, const std::string& path, const json& body) {
  const Endpoint ep = split_endpoint(cfg.endpoint);
  int attempts = 0;
  std::string last_error = "endpoint not configured";
  while (attempts <= cfg.max_retries) {
    ++attempts;
    httplib::Client client(ep.host);
    client.set_connection_timeout(cfg.timeout_s);
    client.set_read_timeout(cfg.timeout_s);
    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
    auto res = client.Post(ep.base + path, headers, body.dump(), "application/json");
    if (!res) {
      last_error = "connection failed";
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      last_error = std::string("response parse error: ") + e.what();
    }
  }
  throw TransportError("POST " + cfg.endpoint + path + " failed: " + last_error, attempts);
}

}  // namespace

RemoteConfig RemoteConfig::embedder_from_env() {
  RemoteConfig c;
  c.endpoint = env_or("EMBED_ENDPOINT", "");
  return c;
}

RemoteConfig RemoteConfig::lvlm_from_env() {
  RemoteConfig c;
  c.endpoint = env_or("LVLM_ENDPOINT", "");
  c.api_key = env_or("LVLM_API_KEY", "");
  c.model = env_or("LVLM_MODEL", "");
  return c;
}

RemoteEmbedder::RemoteEmbedder(RemoteConfig cfg, int declared_dim)
    : cfg_(std::move(cfg)), dim_(declared_dim) {
  if (dim_ < 1) throw DimensionError("remote embedder: declared dimension must be >= 1");
}

Embedding RemoteEmbedder::embed_text(const std::string& label) const {
  if (label.empty()) throw VocabularyError("cannot embed empty label");
  const json response = post_json(cfg_, "/embed", json{{"texts", {label}}});
  if (!response.contains("embeddings") || !response["embeddings"].is_array() ||
      response["embeddings"].size() != 1)
    throw ProviderContractError("embed endpoint returned malformed response");
  const auto& values = response["embeddings"][0];
  if (static_cast<int>(values.size()) != dim_)
    throw ProviderContractError("embed endpoint returned dimension " +
                                std::to_string(values.size()) + ", declared " +
                                std::to_string(dim_));
  Embedding e(dim_);
  for (int i = 0; i < dim_; ++i) e(i) = values.at(static_cast<size_t>(i)).get<double>();
  if (!is_unit(e)) throw ProviderContractError("embed endpoint returned non-unit embedding");
  return e;
}

const std::string& decompose_prompt_template() {
  // kept in sync with assets/prompts/decompose_v1.txt
  static const std::string t = R"(You are assisting a robot that searches indoor environments.
Given the search instruction below, respond with strict JSON only, no prose:
{
  "primary": "<the object the robot must reach>",
  "explicit_targets": ["<objects and locations explicitly mentioned>"],
  "inferred_targets": ["<higher-level concepts or rooms you infer>"],
  "implicit_targets": ["<objects implied when the instruction is a demand>"],
  "relations": [{"kind": "in|on|near|next_to|under|not_in|far_from|unrelated",
                 "subject": "<target>"}]
}
Every relation describes the subject's position relative to the primary target.
Instruction: )";
  return t;
}

const std::string& validate_prompt_template() {
  // kept in sync with assets/prompts/validate_v1.txt
  static const std::string t = R"(You are validating a candidate object found by a robot.
Given the original instruction, the primary target and labels of nearby objects,
respond with strict JSON only:
{"primary_present": true|false, "constraint_satisfied": true|false, "rationale": "<short>"}
constraint_satisfied may only be true when primary_present is true and the full
instruction (including spatial relations) is satisfied.
)";
  return t;
}

namespace {

// Strict parse of the decomposition JSON contract; throws LoadError on any
// schema violation.
QueryDecomposition parse_remote_decomposition(const std::string& raw_query, const json& j) {
  QueryDecomposition d;
  d.raw = raw_query;
  if (!j.contains("primary") || !j["primary"].is_string() || j["primary"].get<std::string>().empty())
    throw LoadError("remote decomposition: missing primary target");
  d.primary = j["primary"].get<std::string>();
  auto read_list = [&](const char* key, std::vector<std::string>& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_array()) throw LoadError(std::string("remote decomposition: ") + key);
    for (const auto& v : j[key]) out.push_back(v.get<std::string>());
  };
  read_list("explicit_targets", d.explicit_targets);
  read_list("inferred_targets", d.inferred_targets);
  read_list("implicit_targets", d.implicit_targets);
  for (const auto& r : j.value("relations", json::array())) {
    const auto kind = relation_kind_from_string(r.at("kind").get<std::string>());
    if (!kind) throw LoadError("remote decomposition: unknown relation kind");
    d.relations.push_back({*kind, r.at("subject").get<std::string>(), d.primary});
  }
  return filter_proximity(std::move(d));
}

}  // namespace

QueryDecomposition decompose_remote(const std::string& text, const RemoteConfig& cfg,
                                    const Lexicon& fallback_lexicon) {
  try {
    json request = {
        {"model", cfg.model},
        {"messages", json::array({json{{"role", "user"},
                                       {"content", decompose_prompt_template() + text}}})},
        {"response_format", json{{"type", "json_object"}}},
    };
    const json response = post_json(cfg, "/v1/chat/completions", request);
    const std::string content =
        response.at("choices").at(0).at("message").at("content").get<std::string>();
    return parse_remote_decomposition(text, json::parse(content));
  } catch (const std::exception&) {
    QueryDecomposition d = decompose(text, fallback_lexicon);
    d.remote_fallback = true;
    return d;
  }
}

ValidationVerdict RemoteValidator::validate(const ValidationContext& ctx, const std::string& query,
                                            const std::string& primary) {
  try {
    json request = {{"query", query},
                    {"primary", primary},
                    {"candidates", ctx.nearby_labels},
                    {"image", nullptr}};
    const json response = post_json(cfg_, "/validate", request);
    ValidationVerdict v;
    v.primary_present = response.at("primary_present").get<bool>();
    v.constraint_satisfied = response.at("constraint_satisfied").get<bool>();
    v.rationale = response.value("rationale", std::string());
    if (v.constraint_satisfied && !v.primary_present)
      throw LoadError("validator response violates the verdict invariant");
    return v;
  } catch (const std::exception& e) {
    // Unconfirmed on any failure: the search continues rather than succeeding.
    return ValidationVerdict{false, false, std::string("remote validation failed: ") + e.what()};
  }
}

}  // namespace divnav
