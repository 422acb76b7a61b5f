#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "divnav/detection.hpp"
#include "oracles.hpp"

using namespace divnav;

namespace {

GridSpec spec_of(int w, int h, double res = 0.25) { return GridSpec{res, w, h, 0.0, 0.0}; }

ExplorationState observed_everywhere(const GridSpec& spec) {
  ExplorationState s = ExplorationState::empty(spec);
  s.observed.fill(1);
  s.navigable.fill(1);
  return s;
}

// Open 8x8 world with a goal mug in the "kitchen" (left half) and a decoy mug
// outside it.
WorldModel tiny_world() {
  WorldModel w;
  w.spec = spec_of(8, 8);
  w.occupancy = Mask(w.spec, 0);
  w.rooms = {{"kitchen", 0, 0, 4, 8}};
  w.objects = {
      {"goal_mug", "mug", {1, 1}, {{RelationKind::In, "kitchen"}}},
      {"decoy_mug", "mug", {6, 6}, {}},
  };
  w.affinity = AffinityMatrix::identity({"mug", "kitchen"});
  w.validate();
  return w;
}

GridPose pose_at(const WorldModel& w, Cell c) {
  const auto [x, y] = w.spec.cell_center(c);
  return GridPose{x, y, 0.0};
}

}  // namespace

TEST_CASE("consensus keeps the global max and drops median cells") {
  const GridSpec spec = spec_of(10, 10, 0.1);
  const ExplorationState state = observed_everywhere(spec);
  std::mt19937_64 rng(4);
  SimilarityMap s_comb = oracles::random_map(spec, rng);
  // force a known max and a known median-ish cell
  s_comb.at({3, 3}) = 1.0;
  std::vector<double> sorted = s_comb.scores;
  std::sort(sorted.begin(), sorted.end());
  const Cell median_cell = [&] {
    const double median = sorted[sorted.size() / 2];
    for (int i = 0; i < spec.cells(); ++i)
      if (s_comb.scores[static_cast<size_t>(i)] == median) return spec.cell_of(i);
    return Cell{0, 0};
  }();

  std::vector<Detection> dets = {{"mug", {3, 3}, 1.0, {}}, {"mug", median_cell, 1.0, {}}};
  const auto kept = consensus_filter(dets, s_comb, state, ConsensusConfig{});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].cell == Cell{3, 3});
}

TEST_CASE("consensus equals a sort-and-threshold oracle on 20 detections") {
  const GridSpec spec = spec_of(16, 16, 0.1);
  const ExplorationState state = observed_everywhere(spec);
  std::mt19937_64 rng(8);
  const SimilarityMap s_comb = oracles::random_map(spec, rng);
  std::uniform_int_distribution<int> pick(0, spec.cells() - 1);
  std::vector<Detection> dets;
  for (int i = 0; i < 20; ++i) dets.push_back({"mug", spec.cell_of(pick(rng)), 1.0, {}});

  const auto kept = consensus_filter(dets, s_comb, state, ConsensusConfig{95.0});
  const double threshold = oracles::percentile_by_sort(s_comb.scores, 95.0);
  std::vector<Detection> expected;
  for (const auto& d : dets)
    if (s_comb.at(d.cell) >= threshold) expected.push_back(d);
  REQUIRE(kept.size() == expected.size());
  // output sorted by cell score descending
  for (size_t i = 1; i < kept.size(); ++i)
    CHECK(s_comb.at(kept[i - 1].cell) >= s_comb.at(kept[i].cell));
}

TEST_CASE("percentile is computed over observed cells only") {
  const GridSpec spec = spec_of(10, 1, 0.1);
  ExplorationState state = ExplorationState::empty(spec);
  // only two observed cells, scores 0.2 and 0.4; everything else unobserved 0
  state.observed.at({0, 0}) = 1;
  state.observed.at({1, 0}) = 1;
  SimilarityMap s_comb{spec, std::vector<double>(10, 0.0)};
  s_comb.at({0, 0}) = 0.2;
  s_comb.at({1, 0}) = 0.4;
  std::vector<Detection> dets = {{"mug", {1, 0}, 1.0, {}}, {"mug", {0, 0}, 1.0, {}}};
  const auto kept = consensus_filter(dets, s_comb, state, ConsensusConfig{95.0});
  // p95 over {0.2, 0.4} is 0.4; a global percentile (8 zero cells) would be 0.2
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].cell == Cell{1, 0});
}

TEST_CASE("label_matches_primary: word-aligned suffix semantics") {
  CHECK(label_matches_primary("rug", "blue rug"));
  CHECK(label_matches_primary("blue rug", "blue rug"));
  CHECK(label_matches_primary("Mug", "mug"));
  CHECK(label_matches_primary("fire extinguisher", "fire extinguisher"));
  CHECK(!label_matches_primary("rug", "mug"));
  CHECK(!label_matches_primary("smug", "mug"));  // not word-aligned
  CHECK(!label_matches_primary("table", "rug"));
}

TEST_CASE("oracle validator at the true goal with zero noise confirms both") {
  const WorldModel w = tiny_world();
  OracleValidator v(w, "goal_mug", OracleValidatorConfig{}, 1);
  ValidationContext ctx;
  ctx.robot = pose_at(w, {1, 1});
  ctx.candidate = {"mug", {1, 1}, 1.0, ctx.robot};
  const auto verdict = v.validate(ctx, "the mug in the kitchen", "mug");
  CHECK(verdict.primary_present);
  CHECK(verdict.constraint_satisfied);
}

TEST_CASE("oracle validator at a decoy sees the primary but rejects the constraint") {
  const WorldModel w = tiny_world();
  OracleValidator v(w, "goal_mug", OracleValidatorConfig{}, 1);
  ValidationContext ctx;
  ctx.robot = pose_at(w, {6, 6});
  ctx.candidate = {"mug", {6, 6}, 1.0, ctx.robot};
  const auto verdict = v.validate(ctx, "the mug in the kitchen", "mug");
  CHECK(verdict.primary_present);
  CHECK(!verdict.constraint_satisfied);
}

TEST_CASE("oracle validator far from any instance denies both") {
  const WorldModel w = tiny_world();
  OracleValidator v(w, "goal_mug", OracleValidatorConfig{}, 1);
  ValidationContext ctx;
  ctx.robot = pose_at(w, {4, 4});
  ctx.candidate = {"mug", {4, 4}, 1.0, ctx.robot};
  const auto verdict = v.validate(ctx, "the mug in the kitchen", "mug");
  CHECK(!verdict.primary_present);
  CHECK(!verdict.constraint_satisfied);
}

TEST_CASE("forced false-negative noise flips a true confirmation off") {
  const WorldModel w = tiny_world();
  OracleValidatorConfig cfg;
  cfg.eps_false_negative = 1.0;
  OracleValidator v(w, "goal_mug", cfg, 1);
  ValidationContext ctx;
  ctx.robot = pose_at(w, {1, 1});
  ctx.candidate = {"mug", {1, 1}, 1.0, ctx.robot};
  const auto verdict = v.validate(ctx, "the mug in the kitchen", "mug");
  CHECK(!verdict.primary_present);
  CHECK(!verdict.constraint_satisfied);
}

TEST_CASE("verdict invariant survives false-positive noise") {
  const WorldModel w = tiny_world();
  OracleValidatorConfig cfg;
  cfg.eps_false_positive = 1.0;
  OracleValidator v(w, "goal_mug", cfg, 1);
  ValidationContext ctx;
  ctx.robot = pose_at(w, {4, 4});  // nothing nearby
  ctx.candidate = {"mug", {4, 4}, 1.0, ctx.robot};
  const auto verdict = v.validate(ctx, "the mug in the kitchen", "mug");
  if (verdict.constraint_satisfied) CHECK(verdict.primary_present);
}

TEST_CASE("transition checker admits exactly the legal machine") {
  CHECK_NOTHROW(check_transition(PhaseKind::Exploring, PhaseKind::Approaching));
  CHECK_NOTHROW(check_transition(PhaseKind::Exploring, PhaseKind::TerminatedNotFound));
  CHECK_NOTHROW(check_transition(PhaseKind::Approaching, PhaseKind::Validating));
  CHECK_NOTHROW(check_transition(PhaseKind::Approaching, PhaseKind::Exploring));
  CHECK_NOTHROW(check_transition(PhaseKind::Validating, PhaseKind::Succeeded));
  CHECK_NOTHROW(check_transition(PhaseKind::Validating, PhaseKind::Exploring));

  CHECK_THROWS(check_transition(PhaseKind::Exploring, PhaseKind::Succeeded));
  CHECK_THROWS(check_transition(PhaseKind::Exploring, PhaseKind::Validating));
  CHECK_THROWS(check_transition(PhaseKind::Approaching, PhaseKind::Succeeded));
  CHECK_THROWS(check_transition(PhaseKind::Approaching, PhaseKind::TerminatedNotFound));
  CHECK_THROWS(check_transition(PhaseKind::Validating, PhaseKind::TerminatedNotFound));
  CHECK_THROWS(check_transition(PhaseKind::Succeeded, PhaseKind::Exploring));
  CHECK_THROWS(check_transition(PhaseKind::TerminatedNotFound, PhaseKind::Exploring));
}
