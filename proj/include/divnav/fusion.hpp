#pragma once

#include <span>

#include "divnav/belief_map.hpp"

namespace divnav {

struct FusionConfig {
  double alpha{0.8};  // weight of the intersection term, in [0,1]

  void validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw DimensionError("fusion alpha must lie in [0,1]");
  }
};

// Continuous value intersection score: per-cell minimum across maps.
SimilarityMap intersect(std::span<const SimilarityMap> maps);

// alpha * min_i S_i + (1-alpha) * max_i S_i, per cell.
SimilarityMap combine(std::span<const SimilarityMap> maps, const FusionConfig& cfg);

}  // namespace divnav
