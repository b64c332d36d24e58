#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "bohmctx/report.hpp"

namespace bohmctx::cli {

enum class TableFormat { csv, json };

struct OutputOptions {
  std::filesystem::path directory = "bohmctx_out";
  TableFormat format = TableFormat::csv;
  bool plot = false;
  /// Trajectory points kept per trajectory in the table (endpoints always).
  std::size_t max_trajectory_points = 201;
};

struct RunManifest {
  std::string subcommand;
  std::string scenario;
  std::uint64_t seed = 0;
  /// Flat key -> value text of the config actually run.
  std::vector<std::pair<std::string, std::string>> config;
  double duration_seconds = 0.0;
  std::string started_utc;
  std::size_t threads = 0;
};

/// Raised when the output directory or a file cannot be written (exit code 2).
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Aggregates, verdicts and audits. No timing or thread information, so equal
/// inputs give byte-identical text.
nlohmann::ordered_json summary_json(const ScenarioResult& result);

/// Writes summary.json, the run/trajectory/overlap tables, optional SVG plots
/// and manifest.json into options.directory. Returns the files written.
std::vector<std::filesystem::path> write_outputs(const ScenarioResult& result, const RunManifest& manifest,
                                                 const OutputOptions& options);

/// Creates the directory or throws OutputError.
void ensure_directory(const std::filesystem::path& directory);

/// Only summary.json and manifest.json (used by born-check).
std::vector<std::filesystem::path> write_summary_only(const nlohmann::ordered_json& summary,
                                                      const RunManifest& manifest, const OutputOptions& options);

/// Minimal line plot.
struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};
std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series, const std::vector<std::string>& x_ticks = {});

}  // namespace bohmctx::cli
