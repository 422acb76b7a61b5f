#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "divnav/fusion.hpp"
#include "oracles.hpp"

using namespace divnav;

namespace {

SimilarityMap map_of(const GridSpec& spec, std::vector<double> scores) {
  return SimilarityMap{spec, std::move(scores)};
}

}  // namespace

TEST_CASE("intersect of identical maps is the identity") {
  const GridSpec spec{0.1, 2, 2, 0, 0};
  const auto a = map_of(spec, {0.1, 0.9, 0.4, 0.0});
  const std::vector<SimilarityMap> maps = {a, a};
  CHECK(intersect(maps).scores == a.scores);
}

TEST_CASE("intersect takes the per-cell minimum") {
  const GridSpec spec{0.1, 1, 1, 0, 0};
  const std::vector<SimilarityMap> maps = {map_of(spec, {0.9}), map_of(spec, {0.2})};
  CHECK(intersect(maps).scores[0] == doctest::Approx(0.2));
}

TEST_CASE("combine of a single map is the input for any alpha") {
  const GridSpec spec{0.1, 3, 1, 0, 0};
  const auto a = map_of(spec, {0.3, 0.8, 0.05});
  for (double alpha : {0.0, 0.25, 0.8, 1.0}) {
    const std::vector<SimilarityMap> maps = {a};
    const auto out = combine(maps, FusionConfig{alpha});
    for (size_t i = 0; i < a.scores.size(); ++i)
      CHECK(out.scores[i] == doctest::Approx(a.scores[i]).epsilon(1e-12));
  }
}

TEST_CASE("combine at alpha=1 equals intersect") {
  const GridSpec spec{0.1, 4, 4, 0, 0};
  std::mt19937_64 rng(1);
  const std::vector<SimilarityMap> maps = {oracles::random_map(spec, rng),
                                           oracles::random_map(spec, rng),
                                           oracles::random_map(spec, rng)};
  const auto combined = combine(maps, FusionConfig{1.0});
  const auto inter = intersect(maps);
  for (size_t i = 0; i < combined.scores.size(); ++i)
    CHECK(combined.scores[i] == doctest::Approx(inter.scores[i]).epsilon(1e-12));
}

TEST_CASE("hand-evaluated blend: (0.8, 0.4) at alpha 0.8 gives 0.48") {
  const GridSpec spec{0.1, 1, 1, 0, 0};
  const std::vector<SimilarityMap> maps = {map_of(spec, {0.8}), map_of(spec, {0.4})};
  CHECK(combine(maps, FusionConfig{0.8}).scores[0] == doctest::Approx(0.48));
}

TEST_CASE("random stacks match the brute-force min/max oracles") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> n_maps(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const GridSpec spec{0.1, 16, 16, 0, 0};
    std::vector<SimilarityMap> maps;
    std::vector<std::vector<double>> stack;
    const int n = n_maps(rng);
    for (int m = 0; m < n; ++m) {
      maps.push_back(oracles::random_map(spec, rng));
      stack.push_back(maps.back().scores);
    }
    const auto lo = oracles::pointwise_min(stack);
    const auto hi = oracles::pointwise_max(stack);
    const auto inter = intersect(maps);
    for (size_t i = 0; i < lo.size(); ++i) CHECK(inter.scores[i] == lo[i]);
    for (double alpha : {0.0, 0.25, 0.8, 1.0}) {
      const auto out = combine(maps, FusionConfig{alpha});
      for (size_t i = 0; i < lo.size(); ++i) {
        const double expected = alpha * lo[i] + (1.0 - alpha) * hi[i];
        CHECK(std::abs(out.scores[i] - expected) <= 1e-12);
        CHECK(out.scores[i] >= lo[i] - 1e-12);
        CHECK(out.scores[i] <= hi[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("permutation invariance and duplicate absorption") {
  const GridSpec spec{0.1, 8, 8, 0, 0};
  std::mt19937_64 rng(5);
  std::vector<SimilarityMap> maps = {oracles::random_map(spec, rng),
                                     oracles::random_map(spec, rng),
                                     oracles::random_map(spec, rng)};
  const auto base_int = intersect(maps);
  const auto base_comb = combine(maps, FusionConfig{0.8});
  std::vector<SimilarityMap> shuffled = {maps[2], maps[0], maps[1]};
  CHECK(intersect(shuffled).scores == base_int.scores);
  CHECK(combine(shuffled, FusionConfig{0.8}).scores == base_comb.scores);

  std::vector<SimilarityMap> with_dup = maps;
  with_dup.push_back(maps[1]);
  CHECK(intersect(with_dup).scores == base_int.scores);
}

TEST_CASE("monotonicity: raising one input cell never lowers the fused cell") {
  const GridSpec spec{0.1, 6, 6, 0, 0};
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SimilarityMap> maps = {oracles::random_map(spec, rng),
                                       oracles::random_map(spec, rng)};
    const auto before = combine(maps, FusionConfig{0.8});
    std::uniform_int_distribution<int> pick_cell(0, spec.cells() - 1);
    std::uniform_int_distribution<size_t> pick_map(0, maps.size() - 1);
    const int cell = pick_cell(rng);
    const size_t m = pick_map(rng);
    maps[m].scores[static_cast<size_t>(cell)] =
        std::min(1.0, maps[m].scores[static_cast<size_t>(cell)] + 0.3);
    const auto after = combine(maps, FusionConfig{0.8});
    CHECK(after.scores[static_cast<size_t>(cell)] >=
          before.scores[static_cast<size_t>(cell)] - 1e-12);
  }
}

TEST_CASE("error cases: empty list, mismatched specs, bad alpha") {
  const std::vector<SimilarityMap> empty;
  CHECK_THROWS_AS(intersect(empty), std::invalid_argument);
  CHECK_THROWS_AS(combine(empty, FusionConfig{0.5}), std::invalid_argument);

  const GridSpec a{0.1, 2, 2, 0, 0};
  const GridSpec b{0.1, 3, 2, 0, 0};
  const std::vector<SimilarityMap> mismatched = {
      SimilarityMap{a, std::vector<double>(4, 0.0)},
      SimilarityMap{b, std::vector<double>(6, 0.0)}};
  CHECK_THROWS_AS(intersect(mismatched), DimensionError);

  const std::vector<SimilarityMap> one = {SimilarityMap{a, std::vector<double>(4, 0.0)}};
  CHECK_THROWS_AS(combine(one, FusionConfig{1.5}), DimensionError);
}
