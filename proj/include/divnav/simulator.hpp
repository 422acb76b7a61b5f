#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "divnav/belief_map.hpp"
#include "divnav/embedding.hpp"
#include "divnav/query_pipeline.hpp"
#include "divnav/types.hpp"

namespace divnav {

struct RoomRegion {
  std::string label;
  // rect = [col, row, width, height], cells
  int col{0}, row{0}, width{1}, height{1};

  bool contains(Cell c) const {
    return c.col >= col && c.col < col + width && c.row >= row && c.row < row + height;
  }
};

struct ObjectRelation {
  RelationKind kind{RelationKind::Near};
  std::string target;  // other object id or room label
};

struct ObjectInstance {
  std::string id;
  std::string label;
  Cell cell;
  std::vector<ObjectRelation> relations;
};

// Deterministic 2D grid world: walls, labeled room regions, planted object
// instances and the label-affinity matrix realized by the synthetic embedder.
struct WorldModel {
  GridSpec spec;
  Mask occupancy;  // 1 = wall
  std::vector<RoomRegion> rooms;
  std::vector<ObjectInstance> objects;
  AffinityMatrix affinity;
  double near_distance_m{1.5};  // declared bound for Near/NextTo/On/Under relations

  const ObjectInstance* find_object(const std::string& id) const;
  const RoomRegion* find_room(const std::string& label) const;

  // Checks occupancy shape, object placement on free cells, disjoint rooms,
  // affinity validity and geometric consistency of declared relations.
  void validate() const;
};

enum class AgentAction { Forward, TurnLeft, TurnRight, Found };

struct SensorModel {
  double fov_deg{79.0};
  double range_m{3.0};
  double ray_spacing_deg{1.0};
  // Scale on the confidence-only strength of traversed free cells; semantic
  // hits use the full linear decay.
  double confidence_gain{0.5};
};

struct AgentState {
  GridPose pose;
  double fov_deg{79.0};
  double forward_step_m{0.25};
  double turn_step_deg{15.0};
  double sensor_range_m{3.0};
  bool collided{false};
};

struct SenseResult {
  std::vector<SemanticHit> hits;    // semantic + confidence-only, deduped per cell
  std::vector<double> depths_m;     // one entry per ray, range_m when nothing hit
};

// Casts rays across the FOV; first wall per ray gives depth, traversed free
// cells give confidence-only hits, visible object cells give semantic hits
// with linearly distance-decayed strength.
SenseResult sense(const WorldModel& world, const AgentState& agent, const SensorModel& sensor);

// Discrete action model: Forward translates forward_step_m unless the target
// cell is a wall (no-op + collision flag); turns rotate by turn_step_deg.
// Found is a no-op here; the episode runner consumes it.
AgentState apply_action(const WorldModel& world, const AgentState& agent, AgentAction a);

// True line of sight between two world points (no wall cell on the segment).
bool line_of_sight(const WorldModel& world, double x0, double y0, double x1, double y1);

enum class EpisodeMode { MultiOn, RealWorld };

struct EpisodeTarget {
  std::string query;
  std::string goal_id;
};

struct Episode {
  std::string id;
  std::string world_ref;
  GridPose start;
  EpisodeMode mode{EpisodeMode::MultiOn};
  std::vector<EpisodeTarget> targets;  // protocol default: 3, sequential
  int step_budget{2500};               // per target

  void validate(const WorldModel& world) const;
};

struct DecoyWorldParams {
  int width{40};
  int height{40};
  double resolution{0.25};
  int decoys{2};
  std::string primary_label{"mug"};
  std::string room_label{"kitchen"};
};

// Procedural fixture: one true goal satisfying an In-room constraint plus
// k decoys that match the primary label but sit in other rooms. Used for the
// false-positive contrast studies.
std::pair<WorldModel, Episode> make_decoy_world(std::uint64_t seed,
                                                const DecoyWorldParams& params = {});

}  // namespace divnav
