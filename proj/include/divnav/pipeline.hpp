#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "divnav/belief_map.hpp"
#include "divnav/detection.hpp"
#include "divnav/exploration.hpp"
#include "divnav/fusion.hpp"
#include "divnav/metrics.hpp"
#include "divnav/query_pipeline.hpp"
#include "divnav/simulator.hpp"

namespace divnav {

// One document holding every tunable of the stack; serialized via io.hpp.
struct PipelineConfig {
  // fusion / belief map
  double alpha{0.8};
  int embedding_dim{64};
  int blur_radius{1};
  // exploration
  double tau_explore{0.6};
  double cluster_percentile{95.0};
  double detection_percentile{95.0};
  int inflation_radius_cells{0};
  int snap_radius_cells{4};
  int decision_interval{5};
  // sensor / actions
  double sensor_range_m{3.0};
  double fov_deg{79.0};
  double ray_spacing_deg{1.0};
  double confidence_gain{0.5};
  double forward_step_m{0.25};
  double turn_step_deg{15.0};
  // protocol
  double success_radius_m{0.5};
  int step_budget{2500};  // per target, used when the episode does not set one
  // noise knobs
  double eps_false_negative{0.0};
  double eps_false_positive{0.0};
  double detector_miss_rate{0.0};
  std::map<std::string, std::map<std::string, double>> label_confusion;
  // pipeline variant: primary-target-only baseline fuses over {T-hat} alone
  // and accepts any instance of the primary label at validation time.
  bool primary_only{false};
  bool validate_constraint{true};
  // remote providers (unused unless endpoints are set)
  std::string embed_endpoint;
  std::string lvlm_endpoint;
  std::string lvlm_api_key;
  std::string lvlm_model;
  int max_retries{2};

  void validate() const;
};

// Optional replacements for the simulator-side oracles.
struct Providers {
  std::shared_ptr<const EmbeddingProvider> embedder;  // default: SyntheticEmbedder(world.affinity)
  std::function<QueryDecomposition(const std::string&)> decomposer;  // default: rule-based
  std::function<std::unique_ptr<Validator>(const std::string& goal_id, std::uint64_t seed)>
      make_validator;  // default: OracleValidator
  Lexicon lexicon = Lexicon::defaults();
};

struct StepView {
  int target_index;
  int step;
  const AgentState& agent;
  AgentAction action;
  PhaseKind phase;
  const FeatureGrid& grid;
  const ExplorationState& state;
  const SimilarityMap& s_comb;
};
using StepObserver = std::function<void(const StepView&)>;

struct EpisodeArtifacts {
  EpisodeResult result;
  FeatureGrid grid;
  ExplorationState state;
  SimilarityMap last_s_comb;
  std::vector<GridPose> trajectory;
};

EpisodeArtifacts run_episode_full(const WorldModel& world, const Episode& episode,
                                  const PipelineConfig& cfg, std::uint64_t seed,
                                  const Providers& providers = {},
                                  const StepObserver& observer = nullptr);

EpisodeResult run_episode(const WorldModel& world, const Episode& episode,
                          const PipelineConfig& cfg, std::uint64_t seed,
                          const Providers& providers = {});

// Parallel batch runner. Episode i runs with seed mix(root_seed, i); results
// come back in input order regardless of worker count.
std::vector<EpisodeResult> run_batch(const std::vector<std::pair<WorldModel, Episode>>& episodes,
                                     const PipelineConfig& cfg, std::uint64_t root_seed, int jobs);

}  // namespace divnav
