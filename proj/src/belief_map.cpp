#include "divnav/belief_map.hpp"

#include <cmath>

namespace divnav {

FeatureGrid::FeatureGrid(const GridSpec& spec, int feature_dim) : spec_(spec) {
  spec_.validate();
  if (feature_dim < 1) throw DimensionError("feature dimension must be >= 1");
  features_ = Eigen::MatrixXd::Zero(feature_dim, spec_.cells());
  confidence_ = Eigen::VectorXd::Zero(spec_.cells());
}

void FeatureGrid::set_cell(Cell c, const Embedding& feature, double confidence) {
  if (!spec_.contains(c)) throw BoundsError("set_cell: cell out of bounds");
  if (feature.size() != features_.rows())
    throw DimensionError("set_cell: feature dimension mismatch");
  if (confidence < 0.0 || confidence > 1.0)
    throw DimensionError("set_cell: confidence outside [0,1]");
  features_.col(spec_.index(c)) = feature;
  confidence_(spec_.index(c)) = confidence;
}

void integrate_observation(FeatureGrid& grid, std::span<const SemanticHit> hits,
                           const EmbeddingProvider& embed) {
  if (grid.features_.cols() == 0) throw DimensionError("integrate into uninitialized grid");
  for (const auto& hit : hits) {
    if (!grid.spec_.contains(hit.cell))
      throw BoundsError("integrate_observation: hit cell out of bounds");
    if (hit.strength <= 0.0 || hit.strength > 1.0)
      throw ProviderContractError("hit strength must lie in (0,1]");
    const int idx = grid.spec_.index(hit.cell);
    const double conf = grid.confidence_(idx);
    if (!hit.label.empty()) {
      Embedding e = embed.embed_text(hit.label);
      if (e.size() != grid.features_.rows())
        throw ProviderContractError("embedding dimension mismatch");
      if (!is_unit(e)) throw ProviderContractError("provider returned non-unit embedding");
      Eigen::VectorXd mixed = conf * grid.features_.col(idx) + hit.strength * e;
      const double norm = mixed.norm();
      if (norm > 1e-12) grid.features_.col(idx) = mixed / norm;
    }
    grid.confidence_(idx) = conf + hit.strength * (1.0 - conf);
  }
}

FeatureGrid blur_features(const FeatureGrid& grid, int radius_cells) {
  if (radius_cells < 0) throw DimensionError("blur radius must be >= 0");
  if (radius_cells == 0) return grid;

  const auto& spec = grid.spec();
  const int r = radius_cells;
  const double sigma = r / 2.0;
  const int k = 2 * r + 1;

  // Separable-looking but applied as a full 2D window; grids are small.
  std::vector<double> kernel(static_cast<size_t>(k) * k);
  double ksum = 0.0;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double w = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      kernel[static_cast<size_t>((dy + r) * k + (dx + r))] = w;
      ksum += w;
    }
  for (auto& w : kernel) w /= ksum;

  FeatureGrid out(spec, grid.feature_dim());
  Eigen::VectorXd acc(grid.feature_dim());
  for (int row = 0; row < spec.height; ++row) {
    for (int col = 0; col < spec.width; ++col) {
      acc.setZero();
      double conf_acc = 0.0;
      double weight_in = 0.0;  // kernel mass hitting in-bounds cells
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const Cell n{col + dx, row + dy};
          if (!spec.contains(n)) continue;
          const double w = kernel[static_cast<size_t>((dy + r) * k + (dx + r))];
          weight_in += w;
          const double c = grid.confidence(n);
          conf_acc += w * c;
          acc += (w * c) * grid.features().col(spec.index(n));
        }
      }
      const int idx = spec.index(Cell{col, row});
      // Boundary renormalization keeps interior mass exact and avoids
      // draining confidence at the edges.
      out.confidence_(idx) = weight_in > 0.0 ? conf_acc / weight_in : 0.0;
      const double norm = acc.norm();
      if (norm > 1e-12) out.features_.col(idx) = acc / norm;
    }
  }
  return out;
}

SimilarityMap query(const FeatureGrid& grid, const Embedding& q) {
  if (q.size() != grid.feature_dim())
    throw ProviderContractError("query embedding dimension mismatch");
  if (!is_unit(q)) throw ProviderContractError("query embedding must be unit norm");
  SimilarityMap out{grid.spec(), std::vector<double>(static_cast<size_t>(grid.spec().cells()), 0.0)};
  Eigen::VectorXd cosines = grid.features().transpose() * q;
  for (int i = 0; i < grid.spec().cells(); ++i) {
    if (grid.confidences()(i) <= 0.0) continue;  // unobserved -> exactly 0
    // Observed cells with no semantic content (zero feature) also score 0,
    // keeping empty floor out of the max term.
    if (grid.features().col(i).isZero(0.0)) continue;
    const double s = (cosines(i) + 1.0) / 2.0;
    out.scores[static_cast<size_t>(i)] = std::clamp(s, 0.0, 1.0);
  }
  return out;
}

}  // namespace divnav
