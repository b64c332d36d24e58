#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bohmctx/report.hpp"
#include "bohmctx/sampling.hpp"

namespace bohmctx::analysis {

inline constexpr std::size_t kMinKsSamples = 100;

/// Two-sided Kolmogorov-Smirnov distance between the endpoints and a
/// reference CDF. Rejects fewer than kMinKsSamples endpoints.
double born_rule_ks(std::span<const double> endpoints, const std::function<double(double)>& cdf);
double born_rule_ks(std::span<const double> endpoints, const guidance::GridCdf& cdf);

/// Wilson score interval (95%) for `correct` out of `total`.
Accuracy wilson(std::size_t correct, std::size_t total);

/// Accuracy of predictor `name` over the resolved runs of the report. An
/// unresolved prediction on a resolved run counts as wrong.
Accuracy predictor_accuracy(const EnsembleReport& report, const std::string& name);

/// Recomputes counts, frequencies and accuracies for every predictor.
void summarize(EnsembleReport& report);

/// Pairs of 1D trajectories whose order changes at some common time. All
/// trajectories must share the time base of the first (failed ones up to
/// their exit).
std::size_t crossing_audit(std::span<const guidance::Trajectory> trajectories);

/// Verdict from the system accuracy and the best environment accuracy.
AttributionVerdict determinant_attribution(double system_accuracy,
                                           const std::vector<std::pair<std::string, double>>& environment,
                                           const AttributionThresholds& thresholds = {});
/// Uses the "system" predictor and every other predictor of the report.
AttributionVerdict determinant_attribution(const EnsembleReport& report,
                                           const AttributionThresholds& thresholds = {});

}  // namespace bohmctx::analysis
