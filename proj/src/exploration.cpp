#include "divnav/exploration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "divnav/util.hpp"

namespace divnav {

std::vector<std::vector<Cell>> connected_components_8(const Mask& mask) {
  const auto& spec = mask.spec();
  std::vector<std::vector<Cell>> components;
  Mask visited(spec, 0);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const Cell seed{col, row};
      if (!mask.at(seed) || visited.at(seed)) continue;
      std::vector<Cell> component;
      std::vector<Cell> stack{seed};
      visited.at(seed) = 1;
      while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        component.push_back(c);
        for (const auto& d : neighbor_offsets_8()) {
          const Cell n{c.col + d.col, c.row + d.row};
          if (!spec.contains(n) || visited.at(n) || !mask.at(n)) continue;
          visited.at(n) = 1;
          stack.push_back(n);
        }
      }
      std::sort(component.begin(), component.end(), row_major_less);
      components.push_back(std::move(component));
    }
  }
  return components;
}

ExplorationState ExplorationState::empty(const GridSpec& spec) {
  ExplorationState s;
  s.spec = spec;
  s.observed = Mask(spec, 0);
  s.explored = Mask(spec, 0);
  s.searched = Mask(spec, 0);
  s.navigable = Mask(spec, 0);
  s.query_confidence = Grid<double>(spec, 0.0);
  return s;
}

ExplorationState update_state(const ExplorationState& prev, const FeatureGrid& grid,
                              const Mask& occupancy, const StateThresholds& cfg,
                              std::span<const SemanticHit> recent_hits) {
  if (!(grid.spec() == prev.spec) || !(occupancy.spec() == prev.spec))
    throw DimensionError("update_state: spec mismatch");

  ExplorationState out = prev;

  for (const auto& hit : recent_hits) {
    if (!prev.spec.contains(hit.cell)) throw BoundsError("update_state: hit out of bounds");
    double& qc = out.query_confidence.at(hit.cell);
    qc = qc + hit.strength * (1.0 - qc);
  }

  for (int i = 0; i < prev.spec.cells(); ++i) {
    const double conf = grid.confidences()(i);
    out.observed[i] = conf > 0.0 ? 1 : 0;
    out.explored[i] = conf >= cfg.tau_explore ? 1 : 0;
    const bool searched_now = out.query_confidence[i] >= cfg.tau_explore;
    out.searched[i] = (prev.searched[i] || searched_now) ? 1 : 0;
  }

  // Navigable: free cells with no occupied cell within the inflation radius.
  const int r = cfg.inflation_radius_cells;
  for (int row = 0; row < prev.spec.height; ++row) {
    for (int col = 0; col < prev.spec.width; ++col) {
      const Cell c{col, row};
      bool free = !occupancy.at(c);
      for (int dy = -r; free && dy <= r; ++dy)
        for (int dx = -r; free && dx <= r; ++dx) {
          const Cell n{col + dx, row + dy};
          if (prev.spec.contains(n) && occupancy.at(n) && dx * dx + dy * dy <= r * r)
            free = false;
        }
      out.navigable.at(c) = free ? 1 : 0;
    }
  }
  return out;
}

ExplorationState reset_searched(ExplorationState state) {
  state.searched.fill(0);
  state.query_confidence.fill(0.0);
  return state;
}

std::vector<Frontier> detect_frontiers(const ExplorationState& state) {
  const auto& spec = state.spec;
  Mask boundary(spec, 0);
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      const Cell c{col, row};
      if (!state.observed.at(c) || state.explored.at(c)) continue;  // must be in O\E
      bool touches_explored = false;
      bool touches_navigable = false;
      for (const auto& d : neighbor_offsets_8()) {
        const Cell n{col + d.col, row + d.row};
        if (!spec.contains(n)) continue;
        if (state.explored.at(n)) touches_explored = true;
        if (state.navigable.at(n)) touches_navigable = true;
      }
      if (touches_explored && touches_navigable) boundary.at(c) = 1;
    }
  }

  std::vector<Frontier> frontiers;
  for (auto& cells : connected_components_8(boundary)) {
    Frontier f;
    f.cells = std::move(cells);
    // Medoid: minimal summed distance to the other cells, row-major tie-break.
    double best = std::numeric_limits<double>::infinity();
    f.representative = f.cells.front();
    for (const auto& c : f.cells) {
      double sum = 0.0;
      for (const auto& o : f.cells) sum += euclidean(c, o);
      if (sum < best - 1e-12) {
        best = sum;
        f.representative = c;
      }
    }
    frontiers.push_back(std::move(f));
  }
  std::sort(frontiers.begin(), frontiers.end(), [](const Frontier& a, const Frontier& b) {
    return row_major_less(a.representative, b.representative);
  });
  return frontiers;
}

double score_frontier(const Frontier& f, const SimilarityMap& s_comb,
                      const ExplorationState& state) {
  if (f.cells.empty()) throw DimensionError("score_frontier: empty frontier");
  const auto& spec = state.spec;
  Mask visited(spec, 0);
  std::vector<Cell> stack;
  double score = 0.0;
  auto in_region = [&](Cell c) {
    return state.observed.at(c) && !state.explored.at(c);
  };
  for (const auto& c : f.cells) {
    if (!visited.at(c)) {
      visited.at(c) = 1;
      stack.push_back(c);
    }
  }
  bool any = false;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    if (in_region(c)) {
      score = std::max(score, s_comb.at(c));
      any = true;
    }
    for (const auto& d : neighbor_offsets_8()) {
      const Cell n{c.col + d.col, c.row + d.row};
      if (!spec.contains(n) || visited.at(n) || !in_region(n)) continue;
      visited.at(n) = 1;
      stack.push_back(n);
    }
  }
  return any ? score : 0.0;
}

std::vector<NavGoal> find_clusters(const SimilarityMap& s_comb, const ExplorationState& state,
                                   const ClusterConfig& cfg) {
  const auto& spec = state.spec;
  std::vector<double> pool;
  for (int i = 0; i < spec.cells(); ++i)
    if (state.explored[i] && !state.searched[i]) pool.push_back(s_comb.scores[static_cast<size_t>(i)]);
  if (pool.empty()) return {};
  const double threshold = percentile_nearest_rank(pool, cfg.percentile);

  Mask candidates(spec, 0);
  for (int i = 0; i < spec.cells(); ++i)
    if (state.explored[i] && !state.searched[i] &&
        s_comb.scores[static_cast<size_t>(i)] >= threshold)
      candidates[i] = 1;

  std::vector<NavGoal> goals;
  for (const auto& component : connected_components_8(candidates)) {
    NavGoal g;
    g.kind = GoalKind::ClusterGoal;
    g.cell = component.front();
    g.score = s_comb.at(component.front());
    for (const auto& c : component)
      if (s_comb.at(c) > g.score) {
        g.score = s_comb.at(c);
        g.cell = c;
      }
    goals.push_back(g);
  }
  return goals;
}

std::optional<NavGoal> select_goal(std::span<const Frontier> frontiers,
                                   std::span<const NavGoal> clusters) {
  std::optional<NavGoal> best;
  auto better = [&](const NavGoal& g) {
    if (!best) return true;
    if (g.score != best->score) return g.score > best->score;
    if (g.kind != best->kind) return g.kind == GoalKind::ClusterGoal;
    return row_major_less(g.cell, best->cell);
  };
  for (const auto& c : clusters)
    if (better(c)) best = c;
  for (const auto& f : frontiers) {
    NavGoal g{GoalKind::FrontierGoal, f.representative, f.score};
    if (better(g)) best = g;
  }
  return best;
}

namespace {

struct AStarNode {
  double f;
  double g;
  int index;
  bool operator>(const AStarNode& o) const {
    if (f != o.f) return f > o.f;
    return index > o.index;  // deterministic tie-break
  }
};

}  // namespace

std::optional<std::vector<Cell>> plan_path(const ExplorationState& state, Cell start, Cell goal,
                                           const PlannerConfig& cfg) {
  const auto& spec = state.spec;
  if (!spec.contains(start) || !spec.contains(goal))
    throw BoundsError("plan_path: endpoint out of bounds");
  if (!state.navigable.at(start)) throw DimensionError("plan_path: start not navigable");

  // Snap a non-navigable goal to the nearest navigable cell within range.
  if (!state.navigable.at(goal)) {
    double best = std::numeric_limits<double>::infinity();
    std::optional<Cell> snapped;
    for (int dy = -cfg.snap_radius_cells; dy <= cfg.snap_radius_cells; ++dy)
      for (int dx = -cfg.snap_radius_cells; dx <= cfg.snap_radius_cells; ++dx) {
        const Cell n{goal.col + dx, goal.row + dy};
        if (!spec.contains(n) || !state.navigable.at(n)) continue;
        const double dist = std::sqrt(static_cast<double>(dx * dx + dy * dy));
        if (dist < best - 1e-12 || (std::abs(dist - best) <= 1e-12 && snapped &&
                                    row_major_less(n, *snapped))) {
          best = dist;
          snapped = n;
        }
      }
    if (!snapped) return std::nullopt;
    goal = *snapped;
  }

  const int n = spec.cells();
  std::vector<double> g_cost(static_cast<size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<int> parent(static_cast<size_t>(n), -1);
  std::vector<char> closed(static_cast<size_t>(n), 0);
  std::priority_queue<AStarNode, std::vector<AStarNode>, std::greater<>> open;

  const int start_i = spec.index(start);
  const int goal_i = spec.index(goal);
  g_cost[static_cast<size_t>(start_i)] = 0.0;
  open.push({euclidean(start, goal), 0.0, start_i});

  while (!open.empty()) {
    const AStarNode node = open.top();
    open.pop();
    if (closed[static_cast<size_t>(node.index)]) continue;
    closed[static_cast<size_t>(node.index)] = 1;
    if (node.index == goal_i) break;
    const Cell c = spec.cell_of(node.index);
    for (const auto& d : neighbor_offsets_8()) {
      const Cell nb{c.col + d.col, c.row + d.row};
      if (!spec.contains(nb) || !state.navigable.at(nb)) continue;
      const int ni = spec.index(nb);
      if (closed[static_cast<size_t>(ni)]) continue;
      const double step = (d.col != 0 && d.row != 0) ? std::numbers::sqrt2 : 1.0;
      const double tentative = node.g + step;
      if (tentative < g_cost[static_cast<size_t>(ni)] - 1e-15) {
        g_cost[static_cast<size_t>(ni)] = tentative;
        parent[static_cast<size_t>(ni)] = node.index;
        open.push({tentative + euclidean(nb, goal), tentative, ni});
      }
    }
  }

  if (!closed[static_cast<size_t>(goal_i)]) return std::nullopt;
  std::vector<Cell> path;
  for (int i = goal_i; i != -1; i = parent[static_cast<size_t>(i)]) path.push_back(spec.cell_of(i));
  std::reverse(path.begin(), path.end());
  return path;
}

double path_cost(std::span<const Cell> path) {
  double cost = 0.0;
  for (size_t i = 1; i < path.size(); ++i) cost += euclidean(path[i - 1], path[i]);
  return cost;
}

}  // namespace divnav
