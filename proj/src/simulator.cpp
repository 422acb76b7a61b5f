#include "divnav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "divnav/util.hpp"

namespace divnav {

const ObjectInstance* WorldModel::find_object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

const RoomRegion* WorldModel::find_room(const std::string& label) const {
  for (const auto& r : rooms)
    if (r.label == label) return &r;
  return nullptr;
}

void WorldModel::validate() const {
  spec.validate();
  if (!(occupancy.spec() == spec)) throw LoadError("world: occupancy spec mismatch");
  affinity.validate();

  for (size_t i = 0; i < rooms.size(); ++i) {
    const auto& r = rooms[i];
    if (r.width < 1 || r.height < 1 || r.col < 0 || r.row < 0 ||
        r.col + r.width > spec.width || r.row + r.height > spec.height)
      throw LoadError("world: room '" + r.label + "' outside grid");
    for (size_t j = i + 1; j < rooms.size(); ++j) {
      const auto& o = rooms[j];
      const bool overlap = r.col < o.col + o.width && o.col < r.col + r.width &&
                           r.row < o.row + o.height && o.row < r.row + r.height;
      if (overlap) throw LoadError("world: rooms '" + r.label + "' and '" + o.label + "' overlap");
    }
  }

  std::set<std::string> ids;
  const double near_cells = near_distance_m / spec.resolution;
  for (const auto& obj : objects) {
    if (!ids.insert(obj.id).second) throw LoadError("world: duplicate object id '" + obj.id + "'");
    if (!spec.contains(obj.cell)) throw LoadError("world: object '" + obj.id + "' out of bounds");
    if (occupancy.at(obj.cell)) throw LoadError("world: object '" + obj.id + "' on a wall cell");
  }
  for (const auto& obj : objects) {
    for (const auto& rel : obj.relations) {
      if (const RoomRegion* room = find_room(rel.target)) {
        if (rel.kind == RelationKind::In && !room->contains(obj.cell))
          throw LoadError("world: '" + obj.id + "' declared In '" + rel.target +
                          "' but lies outside it");
        if (rel.kind == RelationKind::NotIn && room->contains(obj.cell))
          throw LoadError("world: '" + obj.id + "' declared NotIn '" + rel.target +
                          "' but lies inside it");
        continue;
      }
      const ObjectInstance* other = find_object(rel.target);
      if (!other)
        throw LoadError("world: relation target '" + rel.target + "' of '" + obj.id +
                        "' is neither room nor object");
      if (is_proximity(rel.kind) && euclidean(obj.cell, other->cell) > near_cells + 1e-9)
        throw LoadError("world: '" + obj.id + "' declared near '" + rel.target +
                        "' beyond the distance bound");
      if (rel.kind == RelationKind::FarFrom && euclidean(obj.cell, other->cell) <= near_cells)
        throw LoadError("world: '" + obj.id + "' declared far from '" + rel.target +
                        "' but is within the bound");
    }
  }
}

namespace {

// March a ray in fixed sub-cell steps; good enough at the grid scales used
// here and trivially deterministic.
struct RayTrace {
  std::vector<Cell> free_cells;  // traversed free cells, in order
  double depth_m;                // distance to first wall, or max range
};

RayTrace cast_ray(const WorldModel& world, double x0, double y0, double angle, double range_m) {
  RayTrace out;
  out.depth_m = range_m;
  const double step = world.spec.resolution * 0.25;
  const double cx = std::cos(angle);
  const double cy = std::sin(angle);
  Cell last{-1, -1};
  for (double d = 0.0; d <= range_m; d += step) {
    const double x = x0 + d * cx;
    const double y = y0 + d * cy;
    const Cell c = world.spec.world_to_cell(x, y);
    if (!world.spec.contains(c)) {
      out.depth_m = d;
      return out;
    }
    if (c == last) continue;
    last = c;
    if (world.occupancy.at(c)) {
      out.depth_m = d;
      return out;
    }
    out.free_cells.push_back(c);
  }
  return out;
}

}  // namespace

SenseResult sense(const WorldModel& world, const AgentState& agent, const SensorModel& sensor) {
  SenseResult result;
  const double half = sensor.fov_deg / 2.0 * M_PI / 180.0;
  const double spacing = sensor.ray_spacing_deg * M_PI / 180.0;
  const int rays = static_cast<int>(std::floor(sensor.fov_deg / sensor.ray_spacing_deg)) + 1;

  std::map<Cell, double> seen;  // free cell -> best (closest) strength
  auto decay = [&](double d) { return std::max(0.0, 1.0 - d / sensor.range_m); };

  for (int i = 0; i < rays; ++i) {
    const double angle = agent.pose.heading - half + i * spacing;
    auto trace = cast_ray(world, agent.pose.x, agent.pose.y, angle, sensor.range_m);
    result.depths_m.push_back(trace.depth_m);
    for (const auto& c : trace.free_cells) {
      const auto [cx, cy] = world.spec.cell_center(c);
      const double d = std::hypot(cx - agent.pose.x, cy - agent.pose.y);
      const double s = decay(d);
      if (s <= 0.0) continue;
      auto it = seen.find(c);
      if (it == seen.end() || s > it->second) seen[c] = s;
    }
  }

  for (const auto& [cell, strength] : seen) {
    const double conf_strength = std::clamp(strength * sensor.confidence_gain, 1e-6, 1.0);
    result.hits.push_back(SemanticHit{"", cell, conf_strength});
  }
  // Object instances on visible free cells produce the semantic content.
  for (const auto& obj : world.objects) {
    auto it = seen.find(obj.cell);
    if (it == seen.end()) continue;
    result.hits.push_back(SemanticHit{obj.label, obj.cell, std::clamp(it->second, 1e-6, 1.0)});
  }
  return result;
}

AgentState apply_action(const WorldModel& world, const AgentState& agent, AgentAction a) {
  AgentState next = agent;
  next.collided = false;
  const double turn = agent.turn_step_deg * M_PI / 180.0;
  switch (a) {
    case AgentAction::TurnLeft:
      next.pose.heading = wrap_angle(agent.pose.heading + turn);
      break;
    case AgentAction::TurnRight:
      next.pose.heading = wrap_angle(agent.pose.heading - turn);
      break;
    case AgentAction::Forward: {
      const double nx = agent.pose.x + agent.forward_step_m * std::cos(agent.pose.heading);
      const double ny = agent.pose.y + agent.forward_step_m * std::sin(agent.pose.heading);
      const Cell c = world.spec.world_to_cell(nx, ny);
      if (!world.spec.contains(c) || world.occupancy.at(c)) {
        next.collided = true;
      } else {
        next.pose.x = nx;
        next.pose.y = ny;
      }
      break;
    }
    case AgentAction::Found:
      break;
  }
  return next;
}

bool line_of_sight(const WorldModel& world, double x0, double y0, double x1, double y1) {
  const double dist = std::hypot(x1 - x0, y1 - y0);
  if (dist < 1e-12) return true;
  auto trace = cast_ray(world, x0, y0, std::atan2(y1 - y0, x1 - x0), dist);
  return trace.depth_m >= dist - 1e-9;
}

void Episode::validate(const WorldModel& world) const {
  if (targets.empty() || targets.size() > 3)
    throw LoadError("episode: expected 1..3 targets (protocol default 3)");
  for (const auto& t : targets)
    if (!world.find_object(t.goal_id))
      throw LoadError("episode: ground-truth id '" + t.goal_id + "' not in world");
  const Cell start_cell = world.spec.world_to_cell(start.x, start.y);
  if (!world.spec.contains(start_cell) || world.occupancy.at(start_cell))
    throw LoadError("episode: start pose not on free space");
  if (step_budget < 1) throw LoadError("episode: step budget must be positive");
}

std::pair<WorldModel, Episode> make_decoy_world(std::uint64_t seed, const DecoyWorldParams& p) {
  std::mt19937_64 rng(mix_seed(seed, fnv1a("decoy-world")));

  WorldModel world;
  world.spec = GridSpec{p.resolution, p.width, p.height, 0.0, 0.0};
  world.occupancy = Mask(world.spec, 0);
  for (int col = 0; col < p.width; ++col) {
    world.occupancy.at({col, 0}) = 1;
    world.occupancy.at({col, p.height - 1}) = 1;
  }
  for (int row = 0; row < p.height; ++row) {
    world.occupancy.at({0, row}) = 1;
    world.occupancy.at({p.width - 1, row}) = 1;
  }

  // Three labeled regions along the top half plus open space below; room
  // labels double as marker-object labels so the regions are queryable.
  const int rw = (p.width - 2) / 3;
  const int rh = (p.height - 2) / 2;
  const std::vector<std::string> room_labels = {p.room_label, "office", "bedroom"};
  for (int i = 0; i < 3; ++i)
    world.rooms.push_back(RoomRegion{room_labels[static_cast<size_t>(i)], 1 + i * rw, 1, rw, rh});

  std::vector<std::string> labels = {p.primary_label};
  labels.insert(labels.end(), room_labels.begin(), room_labels.end());
  world.affinity = AffinityMatrix::identity(labels);

  auto random_cell_in = [&](const RoomRegion& r, int margin) {
    std::uniform_int_distribution<int> dc(r.col + margin, r.col + r.width - 1 - margin);
    std::uniform_int_distribution<int> dr(r.row + margin, r.row + r.height - 1 - margin);
    return Cell{dc(rng), dr(rng)};
  };

  // Room marker objects, a handful per room.
  for (const auto& room : world.rooms) {
    for (int k = 0; k < 4; ++k) {
      ObjectInstance marker;
      marker.id = room.label + "_marker_" + std::to_string(k);
      marker.label = room.label;
      marker.cell = random_cell_in(room, 1);
      world.objects.push_back(std::move(marker));
    }
  }

  // True goal in the constraint room, decoys in the others.
  ObjectInstance goal;
  goal.id = "goal";
  goal.label = p.primary_label;
  goal.cell = random_cell_in(world.rooms[0], 1);
  goal.relations.push_back({RelationKind::In, p.room_label});
  world.objects.push_back(goal);
  for (int k = 0; k < p.decoys; ++k) {
    ObjectInstance decoy;
    decoy.id = "decoy_" + std::to_string(k);
    decoy.label = p.primary_label;
    decoy.cell = random_cell_in(world.rooms[static_cast<size_t>(1 + k % 2)], 1);
    world.objects.push_back(std::move(decoy));
  }
  world.validate();

  Episode ep;
  ep.id = "decoy_" + std::to_string(seed);
  ep.world_ref = ep.id;
  ep.mode = EpisodeMode::RealWorld;
  const auto [sx, sy] = world.spec.cell_center({p.width / 2, p.height - 4});
  ep.start = GridPose{sx, sy, M_PI / 2.0};
  ep.targets.push_back({"the " + p.primary_label + " in the " + p.room_label, "goal"});
  ep.step_budget = 900;
  ep.validate(world);
  return {std::move(world), std::move(ep)};
}

}  // namespace divnav
