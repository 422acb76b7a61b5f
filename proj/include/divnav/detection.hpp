#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "divnav/belief_map.hpp"
#include "divnav/exploration.hpp"
#include "divnav/simulator.hpp"
#include "divnav/types.hpp"

namespace divnav {

struct Detection {
  std::string label;
  Cell cell;
  double confidence{1.0};
  GridPose source_pose;
};

struct ValidationVerdict {
  bool primary_present{false};
  bool constraint_satisfied{false};  // implies primary_present
  std::string rationale;
};

struct ConsensusConfig {
  double percentile{95.0};
};

// Keeps detections whose cell's S_comb lies at or above the given percentile
// of S_comb over observed cells; sorted by cell score descending (row-major
// tie-break). Detector activation AND map agreement.
std::vector<Detection> consensus_filter(std::vector<Detection> dets, const SimilarityMap& s_comb,
                                        const ExplorationState& state, const ConsensusConfig& cfg);

// What a validator gets to look at: the symbolic stand-in for the rendered
// context of the real system.
struct ValidationContext {
  GridPose robot;
  Detection candidate;
  std::vector<std::string> nearby_labels;
};

class Validator {
 public:
  virtual ~Validator() = default;
  virtual ValidationVerdict validate(const ValidationContext& ctx, const std::string& query,
                                     const std::string& primary) = 0;
};

struct OracleValidatorConfig {
  double radius_m{0.5};  // validation radius = success radius
  double eps_false_negative{0.0};
  double eps_false_positive{0.0};
};

// Ground-truth validator: primary_present iff a true instance matching the
// primary label lies within the validation radius of the robot;
// constraint_satisfied iff that instance is the episode's goal. Optional flip
// noise for robustness studies.
class OracleValidator : public Validator {
 public:
  OracleValidator(const WorldModel& world, std::string goal_id, OracleValidatorConfig cfg,
                  std::uint64_t noise_seed);

  ValidationVerdict validate(const ValidationContext& ctx, const std::string& query,
                             const std::string& primary) override;

 private:
  const WorldModel& world_;
  std::string goal_id_;
  OracleValidatorConfig cfg_;
  std::mt19937_64 rng_;
};

// True when an instance label names the same object as the (possibly
// adjective-qualified) primary phrase, e.g. label "rug" vs primary "blue rug".
bool label_matches_primary(const std::string& label, const std::string& primary);

enum class PhaseKind { Exploring, Approaching, Validating, Succeeded, TerminatedNotFound };

struct SearchPhase {
  PhaseKind kind{PhaseKind::Exploring};
  std::optional<Detection> detection;  // set for Approaching/Validating
};

std::string to_string(PhaseKind k);

// Transition checker: throws on transitions outside
// Exploring->Approaching->Validating->{Succeeded|Exploring} and
// Exploring->TerminatedNotFound.
void check_transition(PhaseKind from, PhaseKind to);

}  // namespace divnav
