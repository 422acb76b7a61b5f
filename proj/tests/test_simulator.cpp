#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "divnav/pipeline.hpp"
#include "divnav/simulator.hpp"
#include "divnav/util.hpp"

using namespace divnav;

namespace {

// Open 12x12 room (perimeter walls) at 0.25 m resolution.
WorldModel open_room() {
  WorldModel w;
  w.spec = GridSpec{0.25, 12, 12, 0.0, 0.0};
  w.occupancy = Mask(w.spec, 0);
  for (int i = 0; i < 12; ++i) {
    w.occupancy.at({i, 0}) = 1;
    w.occupancy.at({i, 11}) = 1;
    w.occupancy.at({0, i}) = 1;
    w.occupancy.at({11, i}) = 1;
  }
  w.affinity = AffinityMatrix::identity({"mug", "sofa", "plant"});
  return w;
}

AgentState agent_at(double x, double y, double heading) {
  AgentState a;
  a.pose = {x, y, heading};
  return a;
}

}  // namespace

TEST_CASE("24 turns of 15 degrees come back to the starting heading") {
  const WorldModel w = open_room();
  AgentState a = agent_at(1.5, 1.5, 0.3);
  for (int i = 0; i < 24; ++i) a = apply_action(w, a, AgentAction::TurnLeft);
  CHECK(wrap_angle(a.pose.heading - 0.3) == doctest::Approx(0.0).epsilon(1e-9));
  for (int i = 0; i < 24; ++i) a = apply_action(w, a, AgentAction::TurnRight);
  CHECK(wrap_angle(a.pose.heading - 0.3) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("forward into a wall is a flagged no-op") {
  const WorldModel w = open_room();
  // facing the west wall from the adjacent free cell
  AgentState a = agent_at(0.375, 1.5, M_PI);
  const AgentState after = apply_action(w, a, AgentAction::Forward);
  CHECK(after.pose.x == a.pose.x);
  CHECK(after.pose.y == a.pose.y);
  CHECK(after.collided);
}

TEST_CASE("four forward steps displace one meter along the heading") {
  const WorldModel w = open_room();
  AgentState a = agent_at(0.5, 1.5, 0.0);
  for (int i = 0; i < 4; ++i) {
    a = apply_action(w, a, AgentAction::Forward);
    CHECK(!a.collided);
  }
  CHECK(a.pose.x == doctest::Approx(1.5));
  CHECK(a.pose.y == doctest::Approx(1.5));
}

TEST_CASE("central rays against a wall one meter away read that depth") {
  const WorldModel w = open_room();
  // east wall starts at x = 11*0.25 = 2.75; stand 1 m before it facing east
  const AgentState a = agent_at(1.75, 1.5, 0.0);
  const SensorModel sensor;
  const SenseResult r = sense(w, a, sensor);
  REQUIRE(!r.depths_m.empty());
  const double mid = r.depths_m[r.depths_m.size() / 2];
  CHECK(std::abs(mid - 1.0) <= w.spec.resolution / 2.0 + 1e-9);
}

TEST_CASE("an object behind a wall is never sensed") {
  WorldModel w = open_room();
  for (int row = 1; row < 11; ++row) w.occupancy.at({6, row}) = 1;  // dividing wall
  w.objects = {{"m", "mug", {8, 5}, {}}};
  w.validate();
  const AgentState a = agent_at(0.875, 1.375, 0.0);  // west side, facing east
  const SenseResult r = sense(w, a, SensorModel{});
  for (const auto& hit : r.hits) CHECK(hit.label != "mug");
}

TEST_CASE("visible set matches an angle/range/line-of-sight oracle") {
  WorldModel w = open_room();
  w.objects = {{"a", "mug", {8, 5}, {}},
               {"b", "sofa", {5, 8}, {}},
               {"c", "plant", {2, 2}, {}}};
  w.validate();
  const AgentState agent = agent_at(1.25, 1.25, M_PI / 4.0);
  const SensorModel sensor;
  const SenseResult r = sense(w, agent, sensor);
  std::set<std::string> sensed;
  for (const auto& hit : r.hits)
    if (!hit.label.empty()) sensed.insert(hit.label);

  for (const auto& obj : w.objects) {
    const auto [ox, oy] = w.spec.cell_center(obj.cell);
    const double dist = std::hypot(ox - agent.pose.x, oy - agent.pose.y);
    const double bearing = std::atan2(oy - agent.pose.y, ox - agent.pose.x);
    const double off = std::abs(wrap_angle(bearing - agent.pose.heading));
    const bool in_fov = off <= (sensor.fov_deg / 2.0 - sensor.ray_spacing_deg) * M_PI / 180.0;
    const bool in_range = dist < sensor.range_m - w.spec.resolution;
    const bool los = line_of_sight(w, agent.pose.x, agent.pose.y, ox, oy);
    if (in_fov && in_range && los) {
      CAPTURE(obj.label);
      CHECK(sensed.count(obj.label) == 1);
    }
  }
  // strength decays linearly with distance
  for (const auto& hit : r.hits) {
    if (hit.label.empty()) continue;
    const auto [ox, oy] = w.spec.cell_center(hit.cell);
    const double d = std::hypot(ox - agent.pose.x, oy - agent.pose.y);
    CHECK(hit.strength == doctest::Approx(1.0 - d / sensor.range_m).epsilon(1e-6));
  }
}

TEST_CASE("world validation rejects inconsistent declarations") {
  SUBCASE("object on a wall cell") {
    WorldModel w = open_room();
    w.objects = {{"m", "mug", {0, 0}, {}}};
    CHECK_THROWS_AS(w.validate(), LoadError);
  }
  SUBCASE("In relation outside the room") {
    WorldModel w = open_room();
    w.rooms = {{"kitchen", 1, 1, 3, 3}};
    w.objects = {{"m", "mug", {8, 8}, {{RelationKind::In, "kitchen"}}}};
    CHECK_THROWS_AS(w.validate(), LoadError);
  }
  SUBCASE("Near relation beyond the distance bound") {
    WorldModel w = open_room();
    w.objects = {{"m", "mug", {1, 1}, {{RelationKind::Near, "s"}}},
                 {"s", "sofa", {10, 10}, {}}};
    CHECK_THROWS_AS(w.validate(), LoadError);
  }
  SUBCASE("overlapping rooms") {
    WorldModel w = open_room();
    w.rooms = {{"kitchen", 1, 1, 4, 4}, {"hall", 3, 3, 4, 4}};
    CHECK_THROWS_AS(w.validate(), LoadError);
  }
}

TEST_CASE("episode validation enforces the target protocol") {
  const WorldModel w = open_room();
  Episode ep;
  ep.id = "e";
  ep.start = {1.5, 1.5, 0.0};
  SUBCASE("no targets") { CHECK_THROWS_AS(ep.validate(w), LoadError); }
  SUBCASE("unknown goal id") {
    ep.targets = {{"the mug", "missing"}};
    CHECK_THROWS_AS(ep.validate(w), LoadError);
  }
  SUBCASE("more than three targets") {
    WorldModel w2 = open_room();
    w2.objects = {{"m", "mug", {5, 5}, {}}};
    ep.targets.assign(4, {"the mug", "m"});
    CHECK_THROWS_AS(ep.validate(w2), LoadError);
  }
}

TEST_CASE("decoy worlds validate and separate goal from decoys") {
  for (std::uint64_t seed : {0ull, 7ull, 123ull}) {
    const auto [world, episode] = make_decoy_world(seed);
    CHECK_NOTHROW(world.validate());
    CHECK_NOTHROW(episode.validate(world));
    REQUIRE(episode.targets.size() == 1);

    const ObjectInstance* goal = world.find_object(episode.targets[0].goal_id);
    REQUIRE(goal != nullptr);
    const RoomRegion* room = world.find_room("kitchen");
    REQUIRE(room != nullptr);
    CHECK(room->contains(goal->cell));

    int decoys = 0;
    for (const auto& obj : world.objects) {
      if (obj.id == goal->id || obj.label != goal->label) continue;
      ++decoys;
      CHECK(!room->contains(obj.cell));  // decoys match the label, not the constraint
    }
    CHECK(decoys == 2);
  }
}

TEST_CASE("episodes are deterministic under a fixed seed") {
  const auto [world, episode] = make_decoy_world(42);
  PipelineConfig cfg;
  cfg.step_budget = 400;
  const EpisodeResult a = run_episode(world, episode, cfg, 9);
  const EpisodeResult b = run_episode(world, episode, cfg, 9);
  CHECK(a == b);
  const EpisodeResult c = run_episode(world, episode, cfg, 10);
  CHECK(c.seed != a.seed);
}

TEST_CASE("multion mode ends the episode on a wrong FOUND") {
  // validator that always says yes: the agent will confirm the first mug it
  // approaches, which in a decoy world can be a decoy
  struct YesValidator : Validator {
    ValidationVerdict validate(const ValidationContext&, const std::string&,
                               const std::string&) override {
      return {true, true, "always"};
    }
  };
  const auto [world, base] = make_decoy_world(3);
  Episode ep = base;
  ep.mode = EpisodeMode::MultiOn;
  // three copies of the same target: only a premature end can shorten outcomes
  ep.targets.assign(3, base.targets[0]);
  PipelineConfig cfg;
  cfg.step_budget = 1200;
  Providers providers;
  providers.make_validator = [](const std::string&, std::uint64_t) {
    return std::make_unique<YesValidator>();
  };
  const EpisodeResult r = run_episode(world, ep, cfg, 5);
  CHECK(r.total_targets == 3);
  bool saw_fp = false;
  for (size_t i = 0; i < r.outcomes.size(); ++i) {
    if (r.outcomes[i].outcome == TargetOutcomeKind::FalsePositive) {
      saw_fp = true;
      CHECK(i == r.outcomes.size() - 1);  // nothing runs after a false positive
    }
  }
  // with an always-yes validator every FOUND fires at the first consensus
  // detection; at least one of the three runs must hit a decoy or the goal
  CHECK(!r.outcomes.empty());
  for (const auto& o : r.outcomes)
    CHECK((o.outcome == TargetOutcomeKind::Found ||
           o.outcome == TargetOutcomeKind::FalsePositive ||
           o.outcome == TargetOutcomeKind::BudgetExhausted));
  (void)saw_fp;
}

TEST_CASE("line of sight respects walls") {
  WorldModel w = open_room();
  for (int row = 1; row < 11; ++row) w.occupancy.at({6, row}) = 1;
  CHECK(!line_of_sight(w, 0.875, 1.375, 2.125, 1.375));  // straight through the wall
  CHECK(line_of_sight(w, 0.875, 1.375, 0.875, 2.375));   // along the west corridor
}
