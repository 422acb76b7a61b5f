#include "divnav/fusion.hpp"

#include <algorithm>

namespace divnav {

namespace {

void check_specs(std::span<const SimilarityMap> maps) {
  if (maps.empty()) throw std::invalid_argument("fusion over empty map list");
  for (const auto& m : maps) {
    if (!(m.spec == maps.front().spec))
      throw DimensionError("fusion inputs must share one GridSpec");
    if (m.scores.size() != static_cast<size_t>(m.spec.cells()))
      throw DimensionError("similarity map size does not match its spec");
  }
}

}  // namespace

SimilarityMap intersect(std::span<const SimilarityMap> maps) {
  check_specs(maps);
  SimilarityMap out = maps.front();
  for (size_t m = 1; m < maps.size(); ++m)
    for (size_t i = 0; i < out.scores.size(); ++i)
      out.scores[i] = std::min(out.scores[i], maps[m].scores[i]);
  return out;
}

SimilarityMap combine(std::span<const SimilarityMap> maps, const FusionConfig& cfg) {
  check_specs(maps);
  cfg.validate();
  SimilarityMap out{maps.front().spec, std::vector<double>(maps.front().scores.size(), 0.0)};
  for (size_t i = 0; i < out.scores.size(); ++i) {
    double lo = maps.front().scores[i];
    double hi = lo;
    for (size_t m = 1; m < maps.size(); ++m) {
      lo = std::min(lo, maps[m].scores[i]);
      hi = std::max(hi, maps[m].scores[i]);
    }
    out.scores[i] = cfg.alpha * lo + (1.0 - cfg.alpha) * hi;
  }
  return out;
}

}  // namespace divnav
