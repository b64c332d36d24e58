#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bohmctx/outcome.hpp"
#include "bohmctx/trajectory.hpp"

namespace bohmctx {

/// Fraction of resolved runs on which a predictor named the outcome, with a
/// 95% Wilson interval. `determined` is false when there were no resolved runs.
struct Accuracy {
  std::size_t correct = 0;
  std::size_t total = 0;
  double fraction = 0.0;
  double lower = 0.0;
  double upper = 1.0;
  double radius = 0.5;
  bool determined = false;
};

enum class VerdictLabel { S_determined, M_determined, mixed, indeterminate };
std::string to_string(VerdictLabel v);

struct AttributionThresholds {
  double determined = 0.99;  // accuracy needed to call a block decisive
  double chance = 0.6;       // accuracy at or below which a block is irrelevant
};

struct AttributionVerdict {
  VerdictLabel label = VerdictLabel::indeterminate;
  double system_accuracy = 0.0;
  double environment_accuracy = 0.0;
  /// Environment predictor with the highest accuracy (apparatus, ancilla...).
  std::string environment;
  AttributionThresholds thresholds;
};

struct RunRecord {
  std::size_t id = 0;
  /// Initial system coordinate (x, or z for Stern-Gerlach).
  double system0 = 0.0;
  /// Initial coordinate sum of each environment block, in block order.
  std::vector<double> block_sums0;
  double system_final = 0.0;
  Outcome outcome = Outcome::unresolved;
  /// Predictor name -> verdict, e.g. "system", "apparatus".
  std::map<std::string, Outcome> predictions;
  std::size_t regularization_events = 0;
  bool failed = false;
};

struct OverlapRow {
  double t = 0.0;
  double system = 1.0;
  std::vector<double> apparatus;
  std::vector<double> log_apparatus;
};

/// One ensemble: a single scenario run at fixed parameters.
struct EnsembleReport {
  std::string scenario;
  std::string label;
  /// Numeric parameters that distinguish this ensemble in a sweep.
  std::map<std::string, double> parameters;
  /// Display names of Outcome::plus and Outcome::minus.
  std::string plus_name = "+";
  std::string minus_name = "-";

  std::vector<RunRecord> runs;
  std::vector<std::string> predictors;
  std::vector<std::string> block_names;

  std::size_t resolved = 0;
  std::size_t unresolved = 0;
  std::size_t failed = 0;
  std::size_t regularized_runs = 0;
  double plus_frequency = 0.0;
  double minus_frequency = 0.0;
  bool degraded = false;  // unresolved fraction above 10%

  std::map<std::string, Accuracy> accuracies;
  std::optional<AttributionVerdict> verdict;
  std::vector<OverlapRow> overlaps;
  /// Invariant audits: name -> measured value (counts, KS distances...).
  std::map<std::string, double> audits;
  /// Named pass/fail of each audit against its stated bound.
  std::map<std::string, bool> audit_passed;

  /// Reduced paths for CSV export and their coordinate names.
  std::vector<guidance::Trajectory> trajectories;
  std::vector<std::string> coordinate_names;
};

/// Tabulated sweep row (used by the ancilla regime map).
struct RegimeRow {
  std::map<std::string, double> parameters;
  std::map<std::string, Accuracy> accuracies;
  AttributionVerdict verdict;
};

struct ScenarioResult {
  std::string scenario;
  std::vector<EnsembleReport> ensembles;
  std::vector<RegimeRow> regime_table;
};

}  // namespace bohmctx
