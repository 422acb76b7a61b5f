#include "divnav/detection.hpp"

#include <algorithm>

#include "divnav/util.hpp"

namespace divnav {

std::vector<Detection> consensus_filter(std::vector<Detection> dets, const SimilarityMap& s_comb,
                                        const ExplorationState& state,
                                        const ConsensusConfig& cfg) {
  if (dets.empty()) return dets;
  std::vector<double> observed_scores;
  for (int i = 0; i < state.spec.cells(); ++i)
    if (state.observed[i]) observed_scores.push_back(s_comb.scores[static_cast<size_t>(i)]);
  if (observed_scores.empty()) return {};
  const double threshold = percentile_nearest_rank(observed_scores, cfg.percentile);

  std::vector<Detection> kept;
  for (auto& d : dets)
    if (s_comb.at(d.cell) >= threshold) kept.push_back(std::move(d));
  std::stable_sort(kept.begin(), kept.end(), [&](const Detection& a, const Detection& b) {
    const double sa = s_comb.at(a.cell), sb = s_comb.at(b.cell);
    if (sa != sb) return sa > sb;
    return row_major_less(a.cell, b.cell);
  });
  return kept;
}

bool label_matches_primary(const std::string& label, const std::string& primary) {
  const std::string l = lower(label);
  const std::string p = lower(primary);
  if (l == p) return true;
  // "blue rug" matches label "rug": the label must be a word-aligned suffix.
  if (p.size() > l.size() && p.compare(p.size() - l.size(), l.size(), l) == 0 &&
      p[p.size() - l.size() - 1] == ' ')
    return true;
  if (l.size() > p.size() && l.compare(l.size() - p.size(), p.size(), p) == 0 &&
      l[l.size() - p.size() - 1] == ' ')
    return true;
  return false;
}

OracleValidator::OracleValidator(const WorldModel& world, std::string goal_id,
                                 OracleValidatorConfig cfg, std::uint64_t noise_seed)
    : world_(world), goal_id_(std::move(goal_id)), cfg_(cfg), rng_(noise_seed) {}

ValidationVerdict OracleValidator::validate(const ValidationContext& ctx, const std::string& query,
                                            const std::string& primary) {
  (void)query;
  ValidationVerdict v;
  for (const auto& obj : world_.objects) {
    if (!label_matches_primary(obj.label, primary)) continue;
    const auto [ox, oy] = world_.spec.cell_center(obj.cell);
    const double dist = std::hypot(ox - ctx.robot.x, oy - ctx.robot.y);
    if (dist > cfg_.radius_m + 1e-9) continue;
    v.primary_present = true;
    if (obj.id == goal_id_) {
      v.constraint_satisfied = true;
      v.rationale = "ground truth: goal instance '" + obj.id + "' within radius";
      break;
    }
    v.rationale = "ground truth: '" + obj.id + "' matches the primary label only";
  }
  if (!v.primary_present) v.rationale = "ground truth: no matching instance within radius";

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng_);
  if (v.constraint_satisfied) {
    if (u < cfg_.eps_false_negative) {
      v = {false, false, "noise: true verdict flipped negative"};
    }
  } else if (u < cfg_.eps_false_positive) {
    v = {true, true, "noise: negative verdict flipped positive"};
  }
  return v;
}

std::string to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::Exploring: return "exploring";
    case PhaseKind::Approaching: return "approaching";
    case PhaseKind::Validating: return "validating";
    case PhaseKind::Succeeded: return "succeeded";
    case PhaseKind::TerminatedNotFound: return "terminated_not_found";
  }
  return "?";
}

void check_transition(PhaseKind from, PhaseKind to) {
  if (from == to) return;
  const bool legal =
      (from == PhaseKind::Exploring &&
       (to == PhaseKind::Approaching || to == PhaseKind::TerminatedNotFound)) ||
      (from == PhaseKind::Approaching &&
       (to == PhaseKind::Validating || to == PhaseKind::Exploring)) ||
      (from == PhaseKind::Validating &&
       (to == PhaseKind::Succeeded || to == PhaseKind::Exploring));
  if (!legal)
    throw std::logic_error("illegal search phase transition " + to_string(from) + " -> " +
                           to_string(to));
}

}  // namespace divnav
