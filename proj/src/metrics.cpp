#include "divnav/metrics.hpp"

#include <boost/math/distributions/beta.hpp>
#include <stdexcept>

namespace divnav {

std::string to_string(TargetOutcomeKind k) {
  switch (k) {
    case TargetOutcomeKind::Found: return "found";
    case TargetOutcomeKind::FalsePositive: return "false_positive";
    case TargetOutcomeKind::TerminatedNotFound: return "terminated_not_found";
    case TargetOutcomeKind::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

std::pair<double, double> clopper_pearson(int successes, int trials, double confidence) {
  if (trials < 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("clopper_pearson: bad counts");
  if (trials == 0) return {0.0, 1.0};  // vacuous interval
  const double alpha = 1.0 - confidence;
  double lo = 0.0, hi = 1.0;
  if (successes > 0)
    lo = boost::math::quantile(boost::math::beta_distribution<>(successes, trials - successes + 1),
                               alpha / 2.0);
  if (successes < trials)
    hi = boost::math::quantile(boost::math::beta_distribution<>(successes + 1, trials - successes),
                               1.0 - alpha / 2.0);
  return {lo, hi};
}

namespace {

RateWithCI make_rate(int num, int den) {
  RateWithCI r;
  r.numerator = num;
  r.denominator = den;
  if (den > 0) {
    r.rate = static_cast<double>(num) / den;
    std::tie(r.ci_low, r.ci_high) = clopper_pearson(num, den);
  }
  return r;
}

}  // namespace

MetricsReport aggregate(std::span<const EpisodeResult> results) {
  if (results.empty()) throw std::invalid_argument("aggregate: empty result set");

  int episodes_all_found = 0;
  int found = 0, false_pos = 0, tnf = 0, attempted = 0, total_targets = 0;
  double progress_sum = 0.0;

  for (const auto& r : results) {
    int ep_found = 0;
    for (const auto& t : r.outcomes) {
      ++attempted;
      switch (t.outcome) {
        case TargetOutcomeKind::Found: ++found; ++ep_found; break;
        case TargetOutcomeKind::FalsePositive: ++false_pos; break;
        case TargetOutcomeKind::TerminatedNotFound: ++tnf; break;
        case TargetOutcomeKind::BudgetExhausted: break;
      }
    }
    const int total = r.total_targets > 0 ? r.total_targets : static_cast<int>(r.outcomes.size());
    total_targets += total;
    progress_sum += total > 0 ? static_cast<double>(ep_found) / total : 0.0;
    if (ep_found == total) ++episodes_all_found;
  }

  MetricsReport report;
  report.episodes = static_cast<int>(results.size());
  report.attempted_targets = attempted;
  report.sr = make_rate(episodes_all_found, report.episodes);
  report.pr = make_rate(found, total_targets);
  report.pr.rate = progress_sum / report.episodes;  // mean-of-fractions, counts kept alongside
  report.srat = make_rate(found, attempted);
  report.fp = make_rate(false_pos, attempted);
  report.tnf = make_rate(tnf, attempted);
  return report;
}

}  // namespace divnav
