#pragma once

#include <optional>
#include <span>
#include <vector>

#include "divnav/belief_map.hpp"
#include "divnav/types.hpp"

namespace divnav {

struct StateThresholds {
  double tau_explore{0.6};       // confidence at which a cell counts as explored
  int inflation_radius_cells{0}; // robot radius for the navigable map
};

// Binary exploration masks derived from the belief map:
//   observed  O: confidence > 0
//   explored  E: confidence >= tau (E subset of O)
//   searched  C: explored under the current query; reset per query (C subset of E)
//   navigable N: obstacle-free after inflation
// query_confidence accumulates observation strength since the last
// reset_searched, so C tracks what has been (re)covered for this query even
// though the global confidence saturates.
struct ExplorationState {
  GridSpec spec;
  Mask observed;
  Mask explored;
  Mask searched;
  Mask navigable;
  Grid<double> query_confidence;

  static ExplorationState empty(const GridSpec& spec);
};

ExplorationState update_state(const ExplorationState& prev, const FeatureGrid& grid,
                              const Mask& occupancy, const StateThresholds& cfg,
                              std::span<const SemanticHit> recent_hits = {});

// Clears the searched map (and its per-query confidence); O, E, N untouched.
ExplorationState reset_searched(ExplorationState state);

struct Frontier {
  std::vector<Cell> cells;  // row-major sorted
  Cell representative;      // medoid
  double score{0.0};
};

enum class GoalKind { FrontierGoal, ClusterGoal, DetectionGoal };

struct NavGoal {
  GoalKind kind{GoalKind::FrontierGoal};
  Cell cell;
  double score{0.0};
};

// Frontier cells are observed-but-unexplored cells 8-adjacent to E and to a
// navigable cell, grouped by 8-connectivity; frontiers ordered row-major by
// representative.
std::vector<Frontier> detect_frontiers(const ExplorationState& state);

// Max S_comb over the O\E cells 8-reachable from the frontier through O\E.
double score_frontier(const Frontier& f, const SimilarityMap& s_comb,
                      const ExplorationState& state);

struct ClusterConfig {
  double percentile{95.0};
};

// High-S_comb components inside E\C; each becomes a ClusterGoal at the
// component argmax, scored by the component max.
std::vector<NavGoal> find_clusters(const SimilarityMap& s_comb, const ExplorationState& state,
                                   const ClusterConfig& cfg);

// Greedy argmax over both candidate lists. Ties prefer clusters (already
// mapped, cheap to verify), then row-major cell order. nullopt = exhaustion.
std::optional<NavGoal> select_goal(std::span<const Frontier> frontiers,
                                   std::span<const NavGoal> clusters);

struct PlannerConfig {
  int snap_radius_cells{4};  // how far a non-navigable goal may snap
};

// 8-connected A* on the navigable mask, unit/sqrt(2) step costs, Euclidean
// heuristic. Returns the cell path including both endpoints, or nullopt when
// no path exists.
std::optional<std::vector<Cell>> plan_path(const ExplorationState& state, Cell start, Cell goal,
                                           const PlannerConfig& cfg = {});

double path_cost(std::span<const Cell> path);

}  // namespace divnav
