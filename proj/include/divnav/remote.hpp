#pragma once

#include <string>

#include "divnav/detection.hpp"
#include "divnav/embedding.hpp"
#include "divnav/query_pipeline.hpp"

namespace divnav {

struct RemoteConfig {
  std::string endpoint;  // http://host:port
  std::string api_key;
  std::string model;
  int max_retries{2};
  int timeout_s{30};

  // Fills unset fields from EMBED_ENDPOINT / LVLM_ENDPOINT / LVLM_API_KEY /
  // LVLM_MODEL environment variables.
  static RemoteConfig embedder_from_env();
  static RemoteConfig lvlm_from_env();
};

// POST /embed {"texts":[...]} -> {"embeddings":[[...]]}; dimension declared up
// front and validated against every response.
class RemoteEmbedder : public EmbeddingProvider {
 public:
  RemoteEmbedder(RemoteConfig cfg, int declared_dim);
  int dim() const override { return dim_; }
  Embedding embed_text(const std::string& label) const override;

 private:
  RemoteConfig cfg_;
  int dim_;
};

// Versioned prompt templates; the files under assets/prompts/ carry the same
// text for editing without a rebuild.
const std::string& decompose_prompt_template();
const std::string& validate_prompt_template();

// Chat-completions-style decomposition. Transport or schema failures fall
// back to the rule-based decomposer and set remote_fallback on the result.
QueryDecomposition decompose_remote(const std::string& text, const RemoteConfig& cfg,
                                    const Lexicon& fallback_lexicon = Lexicon::defaults());

// {query, primary, candidates, image} -> {primary_present, constraint_satisfied,
// rationale}. Errors are treated as unconfirmed verdicts.
class RemoteValidator : public Validator {
 public:
  explicit RemoteValidator(RemoteConfig cfg) : cfg_(std::move(cfg)) {}
  ValidationVerdict validate(const ValidationContext& ctx, const std::string& query,
                             const std::string& primary) override;

 private:
  RemoteConfig cfg_;
};

}  // namespace divnav
