#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "divnav/types.hpp"

namespace divnav {

enum class TargetOutcomeKind { Found, FalsePositive, TerminatedNotFound, BudgetExhausted };

std::string to_string(TargetOutcomeKind k);

struct TargetOutcome {
  std::string query;
  std::string goal_id;
  TargetOutcomeKind outcome{TargetOutcomeKind::TerminatedNotFound};
  int steps{0};
  double path_length_m{0.0};

  bool operator==(const TargetOutcome&) const = default;
};

struct EpisodeResult {
  std::string episode_id;
  std::string mode;  // "multion" or "realworld"
  std::uint64_t seed{0};
  std::string config_fingerprint;
  int total_targets{0};  // episode target-list length, >= outcomes.size()
  std::vector<TargetOutcome> outcomes;

  bool operator==(const EpisodeResult&) const = default;
};

struct RateWithCI {
  double rate{0.0};
  int numerator{0};
  int denominator{0};
  double ci_low{0.0};   // 95% Clopper-Pearson
  double ci_high{1.0};

  bool operator==(const RateWithCI&) const = default;
};

// SR: episodes with every target found / episodes.
// Pr: mean over episodes of found/total.
// SRAT/FP/TNF: found / wrong-FOUND / not-found terminations per attempted
// target (a target counts as attempted when its query was issued).
struct MetricsReport {
  RateWithCI sr;
  RateWithCI pr;  // numerator/denominator hold found/total target counts
  RateWithCI srat;
  RateWithCI fp;
  RateWithCI tnf;
  int episodes{0};
  int attempted_targets{0};

  bool operator==(const MetricsReport&) const = default;
};

// Exact 95% binomial (Clopper-Pearson) interval.
std::pair<double, double> clopper_pearson(int successes, int trials, double confidence = 0.95);

MetricsReport aggregate(std::span<const EpisodeResult> results);

}  // namespace divnav
