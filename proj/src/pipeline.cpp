#include "divnav/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "divnav/util.hpp"

namespace divnav {

void PipelineConfig::validate() const {
  FusionConfig{alpha}.validate();
  if (embedding_dim < 1) throw DimensionError("config: embedding_dim must be >= 1");
  if (blur_radius < 0) throw DimensionError("config: blur_radius must be >= 0");
  if (tau_explore <= 0.0 || tau_explore > 1.0)
    throw DimensionError("config: tau_explore must lie in (0,1]");
  for (double p : {cluster_percentile, detection_percentile})
    if (p < 0.0 || p > 100.0) throw DimensionError("config: percentile outside [0,100]");
  if (sensor_range_m <= 0.0 || fov_deg <= 0.0 || ray_spacing_deg <= 0.0)
    throw DimensionError("config: sensor parameters must be positive");
  if (forward_step_m <= 0.0 || turn_step_deg <= 0.0 || success_radius_m <= 0.0)
    throw DimensionError("config: action parameters must be positive");
  if (step_budget < 1 || decision_interval < 1 || max_retries < 0)
    throw DimensionError("config: budgets must be positive");
  for (double e : {eps_false_negative, eps_false_positive, detector_miss_rate})
    if (e < 0.0 || e > 1.0) throw DimensionError("config: noise rates must lie in [0,1]");
}

namespace {

struct CellLabel {
  Cell cell;
  std::string label;
  auto operator<=>(const CellLabel&) const = default;
};

// Runs the search state machine for one target query. One simulator action
// per tick; validation is instantaneous.
class TargetSearch {
 public:
  TargetSearch(const WorldModel& world, const PipelineConfig& cfg, const QueryDecomposition& decomp,
               const EmbeddingProvider& embedder, Validator& validator, std::uint64_t detector_seed)
      : world_(world), cfg_(cfg), decomp_(decomp), embedder_(embedder), validator_(validator),
        detector_rng_(detector_seed) {
    sensor_.fov_deg = cfg.fov_deg;
    sensor_.range_m = cfg.sensor_range_m;
    sensor_.ray_spacing_deg = cfg.ray_spacing_deg;
    sensor_.confidence_gain = cfg.confidence_gain;

    std::vector<std::string> queries =
        cfg.primary_only ? std::vector<std::string>{decomp.primary} : decomp.proximity_set;
    for (const auto& q : queries) query_embeddings_.push_back(embedder.embed_text(q));
    spin_full_ = std::max(1, static_cast<int>(std::lround(360.0 / cfg.turn_step_deg)));
  }

  struct Result {
    TargetOutcomeKind outcome{TargetOutcomeKind::TerminatedNotFound};
    int steps{0};
    double path_length_m{0.0};
  };

  Result run(AgentState& agent, FeatureGrid& grid, ExplorationState& state, int budget,
             int target_index, const StepObserver& observer, std::vector<GridPose>* trajectory,
             SimilarityMap& s_comb_out) {
    Result result;
    StateThresholds thresholds{cfg_.tau_explore, cfg_.inflation_radius_cells};

    for (int step = 0; step < budget; ++step) {
      auto sensed = sense(world_, agent, sensor_);
      integrate_observation(grid, sensed.hits, embedder_);
      state = update_state(state, grid, world_.occupancy, thresholds, sensed.hits);
      if (s_comb_.scores.empty() || step % cfg_.decision_interval == 0) refresh_similarity(grid);

      auto detections = detect(sensed, agent);
      detections = consensus_filter(std::move(detections), s_comb_, state,
                                    ConsensusConfig{cfg_.detection_percentile});

      const auto action = decide(agent, state, detections);
      if (!action) {
        // goal exhaustion: the machine ended in TerminatedNotFound
        result.outcome = TargetOutcomeKind::TerminatedNotFound;
        break;
      }

      const GridPose before = agent.pose;
      agent = apply_action(world_, agent, *action);
      if (agent.collided) path_.clear();
      result.path_length_m += std::hypot(agent.pose.x - before.x, agent.pose.y - before.y);
      ++result.steps;
      if (trajectory) trajectory->push_back(agent.pose);
      if (observer)
        observer(StepView{target_index, step, agent, *action, phase_.kind, grid, state, s_comb_});

      if (*action == AgentAction::Found) {
        result.outcome = TargetOutcomeKind::Found;  // caller re-classifies vs ground truth
        break;
      }
      if (result.steps >= budget) result.outcome = TargetOutcomeKind::BudgetExhausted;
    }
    if (result.steps >= budget && phase_.kind != PhaseKind::Succeeded)
      result.outcome = TargetOutcomeKind::BudgetExhausted;
    s_comb_out = s_comb_;
    return result;
  }

 private:
  void refresh_similarity(const FeatureGrid& grid) {
    const FeatureGrid blurred = blur_features(grid, cfg_.blur_radius);
    std::vector<SimilarityMap> maps;
    maps.reserve(query_embeddings_.size());
    for (const auto& q : query_embeddings_) maps.push_back(query(blurred, q));
    s_comb_ = combine(maps, FusionConfig{cfg_.alpha});
  }

  std::vector<Detection> detect(const SenseResult& sensed, const AgentState& agent) {
    std::vector<Detection> dets;
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (const auto& hit : sensed.hits) {
      if (hit.label.empty()) continue;
      std::string label = hit.label;
      if (cfg_.detector_miss_rate > 0.0 && uniform(detector_rng_) < cfg_.detector_miss_rate)
        continue;
      if (!cfg_.label_confusion.empty()) {
        if (auto row = cfg_.label_confusion.find(label); row != cfg_.label_confusion.end()) {
          double u = uniform(detector_rng_);
          for (const auto& [other, p] : row->second) {
            if (u < p) {
              label = other;
              break;
            }
            u -= p;
          }
        }
      }
      if (!label_matches_primary(label, decomp_.primary)) continue;
      if (blacklisted_dets_.count(CellLabel{hit.cell, label})) continue;
      dets.push_back(Detection{label, hit.cell, hit.strength, agent.pose});
    }
    return dets;
  }

  // Plans to the nearest navigable cell within the success radius of the
  // detection; rejects endpoints that would leave the robot outside it.
  bool plan_approach(const ExplorationState& state, const AgentState& agent, const Detection& d) {
    const int snap = std::max(1, static_cast<int>(std::ceil(cfg_.success_radius_m /
                                                            world_.spec.resolution)));
    const Cell start = world_.spec.world_to_cell(agent.pose.x, agent.pose.y);
    if (!state.navigable.at(start)) return false;
    auto path = plan_path(state, start, d.cell, PlannerConfig{snap});
    if (!path) return false;
    const auto [ex, ey] = world_.spec.cell_center(path->back());
    const auto [dx, dy] = world_.spec.cell_center(d.cell);
    if (std::hypot(ex - dx, ey - dy) > cfg_.success_radius_m + 1e-9) return false;
    path_ = std::move(*path);
    path_idx_ = 0;
    return true;
  }

  std::optional<AgentAction> decide(AgentState& agent, const ExplorationState& state,
                                    const std::vector<Detection>& detections) {
    // Detections preempt exploration.
    if (phase_.kind == PhaseKind::Exploring && !detections.empty()) {
      for (const auto& d : detections) {
        if (plan_approach(state, agent, d)) {
          check_transition(phase_.kind, PhaseKind::Approaching);
          phase_ = {PhaseKind::Approaching, d};
          spin_remaining_ = 0;
          break;
        }
        blacklisted_dets_.insert(CellLabel{d.cell, d.label});
      }
    }

    if (phase_.kind == PhaseKind::Approaching) {
      const auto [tx, ty] = world_.spec.cell_center(phase_.detection->cell);
      const double dist = std::hypot(tx - agent.pose.x, ty - agent.pose.y);
      if (dist <= cfg_.success_radius_m) {
        check_transition(phase_.kind, PhaseKind::Validating);
        phase_.kind = PhaseKind::Validating;
        path_.clear();
      } else if (auto a = follow_path(agent)) {
        return a;
      } else if (dist <= cfg_.success_radius_m + 2.0 * world_.spec.resolution) {
        // path consumed just short of the radius: home in on the target cell
        return steer_towards(agent, tx, ty);
      } else if (plan_approach(state, agent, *phase_.detection)) {
        return follow_path(agent).value_or(AgentAction::TurnLeft);
      } else {
        blacklisted_dets_.insert(CellLabel{phase_.detection->cell, phase_.detection->label});
        check_transition(phase_.kind, PhaseKind::Exploring);
        phase_ = {PhaseKind::Exploring, std::nullopt};
      }
    }

    if (phase_.kind == PhaseKind::Validating) {
      ValidationContext ctx;
      ctx.robot = agent.pose;
      ctx.candidate = *phase_.detection;
      ctx.nearby_labels.push_back(phase_.detection->label);
      const auto verdict = validator_.validate(ctx, decomp_.raw, decomp_.primary);
      const bool accept =
          cfg_.validate_constraint ? verdict.constraint_satisfied : verdict.primary_present;
      if (accept) {
        check_transition(phase_.kind, PhaseKind::Succeeded);
        phase_.kind = PhaseKind::Succeeded;
        return AgentAction::Found;
      }
      blacklisted_dets_.insert(CellLabel{phase_.detection->cell, phase_.detection->label});
      check_transition(phase_.kind, PhaseKind::Exploring);
      phase_ = {PhaseKind::Exploring, std::nullopt};
      path_.clear();
    }

    // Exploring: finish any pending scan-in-place, then follow / choose goals.
    if (spin_remaining_ > 0) {
      --spin_remaining_;
      return AgentAction::TurnLeft;
    }
    if (auto a = follow_path(agent)) return a;
    if (!path_.empty()) {
      // goal reached: sweep the surroundings before re-deciding
      path_.clear();
      spin_remaining_ = spin_full_;
      --spin_remaining_;
      return AgentAction::TurnLeft;
    }
    if (choose_goal(agent, state)) return follow_path(agent).value_or(AgentAction::TurnLeft);

    // No goal available. Allow one full in-place sweep before declaring
    // exhaustion; early on, the explored mask needs a couple of sweeps to
    // produce its first frontier.
    if (no_goal_spins_ < spin_full_) {
      ++no_goal_spins_;
      return AgentAction::TurnLeft;
    }
    check_transition(phase_.kind, PhaseKind::TerminatedNotFound);
    phase_.kind = PhaseKind::TerminatedNotFound;
    return std::nullopt;
  }

  bool choose_goal(const AgentState& agent, const ExplorationState& state) {
    const Cell start = world_.spec.world_to_cell(agent.pose.x, agent.pose.y);
    if (!state.navigable.at(start)) return false;

    auto frontiers = detect_frontiers(state);
    for (auto& f : frontiers) f.score = score_frontier(f, s_comb_, state);
    auto clusters = find_clusters(s_comb_, state, ClusterConfig{cfg_.cluster_percentile});

    auto blocked = [&](Cell c) { return blacklisted_goals_.count(c) > 0; };
    std::erase_if(frontiers, [&](const Frontier& f) { return blocked(f.representative); });
    std::erase_if(clusters, [&](const NavGoal& g) { return blocked(g.cell); });

    while (true) {
      const auto goal = select_goal(frontiers, clusters);
      if (!goal) return false;
      auto path = plan_path(state, start, goal->cell, PlannerConfig{cfg_.snap_radius_cells});
      if (path) {
        path_ = std::move(*path);
        path_idx_ = 0;
        no_goal_spins_ = 0;
        return true;
      }
      blacklisted_goals_.insert(goal->cell);
      std::erase_if(frontiers,
                    [&](const Frontier& f) { return f.representative == goal->cell; });
      std::erase_if(clusters, [&](const NavGoal& g) { return g.cell == goal->cell; });
    }
  }

  AgentAction steer_towards(const AgentState& agent, double wx, double wy) const {
    const double half_turn = cfg_.turn_step_deg * M_PI / 180.0 / 2.0;
    const double desired = std::atan2(wy - agent.pose.y, wx - agent.pose.x);
    const double diff = wrap_angle(desired - agent.pose.heading);
    if (diff > half_turn) return AgentAction::TurnLeft;
    if (diff < -half_turn) return AgentAction::TurnRight;
    return AgentAction::Forward;
  }

  std::optional<AgentAction> follow_path(const AgentState& agent) {
    const double accept = 0.6 * world_.spec.resolution;
    while (path_idx_ < path_.size()) {
      const auto [wx, wy] = world_.spec.cell_center(path_[path_idx_]);
      const double dist = std::hypot(wx - agent.pose.x, wy - agent.pose.y);
      if (dist < accept) {
        ++path_idx_;
        waypoint_steps_ = 0;
        continue;
      }
      if (++waypoint_steps_ > 40) {  // stuck on a waypoint: force a re-decision
        path_.clear();
        waypoint_steps_ = 0;
        return std::nullopt;
      }
      return steer_towards(agent, wx, wy);
    }
    return std::nullopt;  // path consumed; caller decides what follows
  }

  const WorldModel& world_;
  const PipelineConfig& cfg_;
  const QueryDecomposition& decomp_;
  const EmbeddingProvider& embedder_;
  Validator& validator_;
  std::mt19937_64 detector_rng_;
  SensorModel sensor_;
  std::vector<Embedding> query_embeddings_;
  SimilarityMap s_comb_;

  SearchPhase phase_{};
  std::vector<Cell> path_;
  size_t path_idx_{0};
  int waypoint_steps_{0};
  int spin_remaining_{0};
  int spin_full_{24};
  int no_goal_spins_{0};
  std::set<CellLabel> blacklisted_dets_;
  std::set<Cell> blacklisted_goals_;
};

}  // namespace

EpisodeArtifacts run_episode_full(const WorldModel& world, const Episode& episode,
                                  const PipelineConfig& cfg, std::uint64_t seed,
                                  const Providers& providers, const StepObserver& observer) {
  cfg.validate();
  world.validate();
  episode.validate(world);

  std::shared_ptr<const EmbeddingProvider> embedder = providers.embedder;
  if (!embedder)
    embedder = std::make_shared<SyntheticEmbedder>(cfg.embedding_dim, world.affinity);

  EpisodeArtifacts out;
  out.result.episode_id = episode.id;
  out.result.mode = episode.mode == EpisodeMode::MultiOn ? "multion" : "realworld";
  out.result.seed = seed;
  out.result.total_targets = static_cast<int>(episode.targets.size());

  out.grid = FeatureGrid(world.spec, embedder->dim());
  out.state = ExplorationState::empty(world.spec);

  AgentState agent;
  agent.pose = episode.start;
  agent.fov_deg = cfg.fov_deg;
  agent.forward_step_m = cfg.forward_step_m;
  agent.turn_step_deg = cfg.turn_step_deg;
  agent.sensor_range_m = cfg.sensor_range_m;

  const int budget = episode.step_budget > 0 ? episode.step_budget : cfg.step_budget;

  for (size_t i = 0; i < episode.targets.size(); ++i) {
    const auto& target = episode.targets[i];

    // Searched map resets when a new query begins.
    out.state = reset_searched(std::move(out.state));

    QueryDecomposition decomp = providers.decomposer
                                    ? providers.decomposer(target.query)
                                    : decompose(target.query, providers.lexicon);

    std::unique_ptr<Validator> validator;
    const std::uint64_t vseed = mix_seed(seed, fnv1a("validator", i + 1));
    if (providers.make_validator) {
      validator = providers.make_validator(target.goal_id, vseed);
    } else {
      validator = std::make_unique<OracleValidator>(
          world, target.goal_id,
          OracleValidatorConfig{cfg.success_radius_m, cfg.eps_false_negative,
                                cfg.eps_false_positive},
          vseed);
    }

    TargetSearch search(world, cfg, decomp, *embedder, *validator,
                        mix_seed(seed, fnv1a("detector", i + 1)));
    auto r = search.run(agent, out.grid, out.state, budget, static_cast<int>(i), observer,
                        &out.trajectory, out.last_s_comb);

    TargetOutcome outcome;
    outcome.query = target.query;
    outcome.goal_id = target.goal_id;
    outcome.steps = r.steps;
    outcome.path_length_m = r.path_length_m;
    outcome.outcome = r.outcome;

    if (r.outcome == TargetOutcomeKind::Found) {
      const ObjectInstance* goal = world.find_object(target.goal_id);
      const auto [gx, gy] = world.spec.cell_center(goal->cell);
      const double dist = std::hypot(gx - agent.pose.x, gy - agent.pose.y);
      if (dist > cfg.success_radius_m + 1e-9) outcome.outcome = TargetOutcomeKind::FalsePositive;
    }
    out.result.outcomes.push_back(outcome);

    // The next target is revealed only once the previous resolves as found;
    // in multion mode any other outcome ends the episode.
    if (episode.mode == EpisodeMode::MultiOn &&
        outcome.outcome != TargetOutcomeKind::Found)
      break;
  }
  return out;
}

EpisodeResult run_episode(const WorldModel& world, const Episode& episode,
                          const PipelineConfig& cfg, std::uint64_t seed,
                          const Providers& providers) {
  return run_episode_full(world, episode, cfg, seed, providers).result;
}

std::vector<EpisodeResult> run_batch(const std::vector<std::pair<WorldModel, Episode>>& episodes,
                                     const PipelineConfig& cfg, std::uint64_t root_seed, int jobs) {
  if (jobs < 1) throw DimensionError("run_batch: jobs must be >= 1");
  std::vector<EpisodeResult> results(episodes.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= episodes.size()) break;
      results[i] = run_episode(episodes[i].first, episodes[i].second, cfg,
                               mix_seed(root_seed, i));
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(jobs, static_cast<int>(episodes.size()));
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace divnav
