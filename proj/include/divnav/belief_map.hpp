#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "divnav/embedding.hpp"
#include "divnav/types.hpp"

namespace divnav {

// One grid-level semantic observation. An empty label marks a cell that was
// merely seen (free space in the sensed footprint): it raises confidence but
// leaves the feature untouched.
struct SemanticHit {
  std::string label;
  Cell cell;
  double strength{1.0};  // (0,1]
};

// Per-cell scalar scores in [0,1] for one query. Cells unobserved in the
// source grid carry score 0.
struct SimilarityMap {
  GridSpec spec;
  std::vector<double> scores;

  double at(Cell c) const { return scores[static_cast<size_t>(spec.index(c))]; }
  double& at(Cell c) { return scores[static_cast<size_t>(spec.index(c))]; }
};

// Spatial-semantic belief map: a unit (or zero) feature vector plus an
// observation confidence in [0,1] per cell. Single writer; concurrent reads
// are safe while no writer runs.
class FeatureGrid {
 public:
  FeatureGrid() = default;
  FeatureGrid(const GridSpec& spec, int feature_dim);

  const GridSpec& spec() const { return spec_; }
  int feature_dim() const { return static_cast<int>(features_.rows()); }

  double confidence(Cell c) const { return confidence_(spec_.index(c)); }
  Embedding feature(Cell c) const { return features_.col(spec_.index(c)); }
  const Eigen::VectorXd& confidences() const { return confidence_; }
  const Eigen::MatrixXd& features() const { return features_; }

  void set_cell(Cell c, const Embedding& feature, double confidence);

  friend void integrate_observation(FeatureGrid& grid, std::span<const SemanticHit> hits,
                                    const EmbeddingProvider& embed);
  friend FeatureGrid blur_features(const FeatureGrid& grid, int radius_cells);

 private:
  GridSpec spec_{};
  Eigen::MatrixXd features_;    // feature_dim x cells, column-per-cell
  Eigen::VectorXd confidence_;  // cells
};

// Confidence-weighted running-mean update. For a hit with label l and
// strength s at cell c:
//   feature    <- normalize(conf*feature + s*embed(l))
//   confidence <- conf + s*(1 - conf)
// Label-less hits only apply the confidence update.
void integrate_observation(FeatureGrid& grid, std::span<const SemanticHit> hits,
                           const EmbeddingProvider& embed);

// Gaussian blur (sigma = radius/2, kernel renormalized at boundaries) of the
// confidence field, with features replaced by the confidence-weighted kernel
// average, renormalized to unit length. radius 0 is the identity.
FeatureGrid blur_features(const FeatureGrid& grid, int radius_cells);

// Per observed cell: (cos(feature, q) + 1)/2; unobserved cells score 0.
SimilarityMap query(const FeatureGrid& grid, const Embedding& q);

}  // namespace divnav
