#include "bohmctx/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "bohmctx/errors.hpp"

namespace bohmctx {

std::string to_string(VerdictLabel v) {
  switch (v) {
    case VerdictLabel::S_determined: return "S_determined";
    case VerdictLabel::M_determined: return "M_determined";
    case VerdictLabel::mixed: return "mixed";
    default: return "indeterminate";
  }
}

}  // namespace bohmctx

namespace bohmctx::analysis {

double born_rule_ks(std::span<const double> endpoints, const std::function<double(double)>& cdf) {
  if (endpoints.size() < kMinKsSamples) {
    throw InvalidInput("born_rule_ks: need at least " + std::to_string(kMinKsSamples) + " endpoints");
  }
  std::vector<double> xs(endpoints.begin(), endpoints.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return std::clamp(d, 0.0, 1.0);
}

double born_rule_ks(std::span<const double> endpoints, const guidance::GridCdf& cdf) {
  return born_rule_ks(endpoints, [&](double x) { return cdf.cdf(x); });
}

Accuracy wilson(std::size_t correct, std::size_t total) {
  Accuracy a;
  a.correct = correct;
  a.total = total;
  if (total == 0) return a;
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(correct) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  a.fraction = p;
  a.lower = std::max(0.0, centre - half);
  a.upper = std::min(1.0, centre + half);
  a.radius = half;
  a.determined = true;
  return a;
}

Accuracy predictor_accuracy(const EnsembleReport& report, const std::string& name) {
  std::size_t correct = 0, total = 0;
  for (const auto& run : report.runs) {
    if (!resolved(run.outcome)) continue;
    ++total;
    const auto it = run.predictions.find(name);
    if (it != run.predictions.end() && it->second == run.outcome) ++correct;
  }
  return wilson(correct, total);
}

void summarize(EnsembleReport& report) {
  report.resolved = report.unresolved = report.failed = report.regularized_runs = 0;
  std::size_t plus = 0;
  for (const auto& run : report.runs) {
    if (resolved(run.outcome)) {
      ++report.resolved;
      plus += run.outcome == Outcome::plus;
    } else {
      ++report.unresolved;
    }
    report.failed += run.failed;
    report.regularized_runs += run.regularization_events > 0;
  }
  const double r = static_cast<double>(report.resolved);
  report.plus_frequency = report.resolved ? static_cast<double>(plus) / r : 0.0;
  report.minus_frequency = report.resolved ? 1.0 - report.plus_frequency : 0.0;
  report.degraded = !report.runs.empty() &&
                    static_cast<double>(report.unresolved) > 0.1 * static_cast<double>(report.runs.size());
  report.accuracies.clear();
  for (const auto& name : report.predictors) report.accuracies[name] = predictor_accuracy(report, name);
}

std::size_t crossing_audit(std::span<const guidance::Trajectory> trajectories) {
  if (trajectories.empty()) return 0;
  // Every time base must be a prefix of the longest one.
  const auto longest = std::max_element(trajectories.begin(), trajectories.end(),
                                        [](const auto& a, const auto& b) { return a.size() < b.size(); });
  for (const auto& tr : trajectories) {
    if (tr.size() == 0) throw InvalidInput("crossing_audit: empty trajectory");
    for (std::size_t k = 0; k < tr.size(); ++k) {
      if (tr.times[k] != longest->times[k]) throw InvalidInput("crossing_audit: mismatched time bases");
    }
  }
  std::size_t violations = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    for (std::size_t j = i + 1; j < trajectories.size(); ++j) {
      const auto& a = trajectories[i];
      const auto& b = trajectories[j];
      const std::size_t n = std::min(a.size(), b.size());
      const double d0 = a.point(0)[0] - b.point(0)[0];
      if (d0 == 0.0) continue;  // identical starts have no order to keep
      for (std::size_t k = 1; k < n; ++k) {
        const double d = a.point(k)[0] - b.point(k)[0];
        if (d * d0 <= 0.0) {
          ++violations;
          break;
        }
      }
    }
  }
  return violations;
}

AttributionVerdict determinant_attribution(double system_accuracy,
                                           const std::vector<std::pair<std::string, double>>& environment,
                                           const AttributionThresholds& thresholds) {
  if (!(thresholds.chance < thresholds.determined)) {
    throw InvalidInput("attribution: chance threshold must be below the determined threshold");
  }
  AttributionVerdict v;
  v.thresholds = thresholds;
  v.system_accuracy = system_accuracy;
  for (const auto& [name, acc] : environment) {
    if (v.environment.empty() || acc > v.environment_accuracy) {
      v.environment = name;
      v.environment_accuracy = acc;
    }
  }
  const double s = system_accuracy, m = v.environment_accuracy;
  const double hi = thresholds.determined, lo = thresholds.chance;
  auto between = [&](double a) { return a > lo && a < hi; };
  if (v.environment.empty()) {
    v.label = VerdictLabel::indeterminate;
  } else if (s >= hi && m <= lo) {
    v.label = VerdictLabel::S_determined;
  } else if (m >= hi && s <= lo) {
    v.label = VerdictLabel::M_determined;
  } else if (between(s) && between(m)) {
    v.label = VerdictLabel::mixed;
  } else {
    v.label = VerdictLabel::indeterminate;
  }
  return v;
}

AttributionVerdict determinant_attribution(const EnsembleReport& report,
                                           const AttributionThresholds& thresholds) {
  std::vector<std::pair<std::string, double>> environment;
  double system = 0.0;
  bool system_known = false;
  for (const auto& name : report.predictors) {
    const Accuracy a = predictor_accuracy(report, name);
    if (!a.determined) {
      AttributionVerdict v;
      v.thresholds = thresholds;
      return v;
    }
    if (name == "system") {
      system = a.fraction;
      system_known = true;
    } else {
      environment.emplace_back(name, a.fraction);
    }
  }
  if (!system_known) {
    AttributionVerdict v;
    v.thresholds = thresholds;
    return v;
  }
  return determinant_attribution(system, environment, thresholds);
}

}  // namespace bohmctx::analysis
