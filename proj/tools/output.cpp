#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bohmctx/analysis.hpp"

namespace bohmctx::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string outcome_name(const EnsembleReport& e, Outcome o) {
  switch (o) {
    case Outcome::plus: return e.plus_name;
    case Outcome::minus: return e.minus_name;
    default: return "unresolved";
  }
}

json accuracy_json(const Accuracy& a) {
  return {{"fraction", a.fraction}, {"lower", a.lower},     {"upper", a.upper},
          {"radius", a.radius},     {"correct", a.correct}, {"total", a.total}};
}

json verdict_json(const AttributionVerdict& v) {
  return {{"label", to_string(v.label)},
          {"system_accuracy", v.system_accuracy},
          {"environment", v.environment},
          {"environment_accuracy", v.environment_accuracy},
          {"thresholds", {{"determined", v.thresholds.determined}, {"chance", v.thresholds.chance}}}};
}

json ensemble_json(const EnsembleReport& e) {
  json j;
  j["label"] = e.label;
  j["parameters"] = json::object();
  for (const auto& [k, v] : e.parameters) j["parameters"][k] = v;
  j["outcome_names"] = {{"plus", e.plus_name}, {"minus", e.minus_name}};
  j["runs"] = e.runs.size();
  j["resolved"] = e.resolved;
  j["unresolved"] = e.unresolved;
  j["unresolved_fraction"] =
      e.runs.empty() ? 0.0 : static_cast<double>(e.unresolved) / static_cast<double>(e.runs.size());
  j["failed"] = e.failed;
  j["regularized_runs"] = e.regularized_runs;
  j["degraded"] = e.degraded;
  j["frequencies"] = {{e.plus_name, e.plus_frequency}, {e.minus_name, e.minus_frequency}};
  j["accuracies"] = json::object();
  for (const auto& [k, a] : e.accuracies) j["accuracies"][k] = accuracy_json(a);
  j["verdict"] = e.verdict ? verdict_json(*e.verdict) : json(nullptr);
  j["audits"] = json::object();
  for (const auto& [k, v] : e.audits) {
    const auto it = e.audit_passed.find(k);
    j["audits"][k] = {{"value", v}, {"passed", it == e.audit_passed.end() ? json(nullptr) : json(it->second)}};
  }
  return j;
}

std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw OutputError("failed writing " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

std::size_t stride_for(const guidance::Trajectory& t, std::size_t max_points) {
  if (max_points < 2 || t.size() <= max_points) return 1;
  return (t.size() - 2) / (max_points - 1) + 1;
}

std::string safe(std::string label) {
  for (auto& ch : label) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  }
  return label;
}

// Runs table: one row per run with initial data, outcome and predictions.
void write_runs(const ScenarioResult& r, const fs::path& path, TableFormat format) {
  if (format == TableFormat::json) {
    json all = json::array();
    for (const auto& e : r.ensembles) {
      for (const auto& run : e.runs) {
        json row = {{"ensemble", e.label}, {"run_id", run.id}, {"system0", run.system0}};
        for (std::size_t b = 0; b < run.block_sums0.size() && b < e.block_names.size(); ++b) {
          row[e.block_names[b] + "_sum0"] = run.block_sums0[b];
        }
        row["system_final"] = run.system_final;
        row["outcome"] = outcome_name(e, run.outcome);
        for (const auto& p : e.predictors) row[p + "_prediction"] = outcome_name(e, run.predictions.at(p));
        row["regularization_events"] = run.regularization_events;
        row["failed"] = run.failed;
        all.push_back(std::move(row));
      }
    }
    write_text(path, all.dump(1) + "\n");
    return;
  }
  auto out = open_out(path);
  const auto& first = r.ensembles.front();
  out << "ensemble,run_id,system0";
  for (const auto& b : first.block_names) out << ',' << b << "_sum0";
  out << ",system_final,outcome";
  for (const auto& p : first.predictors) out << ',' << p << "_prediction";
  out << ",regularization_events,failed\n";
  for (const auto& e : r.ensembles) {
    for (const auto& run : e.runs) {
      out << e.label << ',' << run.id << ',' << number(run.system0);
      for (std::size_t b = 0; b < first.block_names.size(); ++b) {
        out << ',' << (b < run.block_sums0.size() ? number(run.block_sums0[b]) : "");
      }
      out << ',' << number(run.system_final) << ',' << outcome_name(e, run.outcome);
      for (const auto& p : first.predictors) {
        const auto it = run.predictions.find(p);
        out << ',' << (it == run.predictions.end() ? "" : outcome_name(e, it->second));
      }
      out << ',' << run.regularization_events << ',' << (run.failed ? 1 : 0) << '\n';
    }
  }
  finish(out, path);
}

void write_trajectory_group(const std::vector<const EnsembleReport*>& group, const fs::path& path,
                            TableFormat format, std::size_t max_points) {
  if (format == TableFormat::json) {
    json all = json::array();
    for (const auto* e : group) {
      for (std::size_t id = 0; id < e->trajectories.size(); ++id) {
        const auto& t = e->trajectories[id];
        const std::size_t stride = stride_for(t, max_points);
        json tr = {{"ensemble", e->label}, {"trajectory_id", id}, {"regularized", t.regularization_events > 0}};
        json ts = json::array(), pts = json::array();
        for (std::size_t k = 0; k < t.size(); ++k) {
          if (k % stride != 0 && k + 1 != t.size()) continue;
          ts.push_back(t.times[k]);
          const auto p = t.point(k);
          pts.push_back(std::vector<double>(p.begin(), p.end()));
        }
        tr["coordinates"] = e->coordinate_names;
        tr["t"] = std::move(ts);
        tr["points"] = std::move(pts);
        all.push_back(std::move(tr));
      }
    }
    write_text(path, all.dump() + "\n");
    return;
  }
  auto out = open_out(path);
  bool header = true;
  for (const auto* e : group) {
    const std::size_t stride = e->trajectories.empty() ? 1 : stride_for(e->trajectories.front(), max_points);
    guidance::write_trajectories_csv(out, e->trajectories, e->coordinate_names, stride, e->label, header);
    header = false;
  }
  finish(out, path);
}

void write_overlaps(const ScenarioResult& r, const fs::path& path, TableFormat format) {
  const auto& first = r.ensembles.front();
  const bool per_block = first.block_names.size() > 1;
  auto total = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0);
  };
  auto product = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 1.0, std::multiplies<>());
  };
  if (format == TableFormat::json) {
    json all = json::array();
    for (const auto& e : r.ensembles) {
      for (const auto& row : e.overlaps) {
        json j = {{"ensemble", e.label},
                  {"t", row.t},
                  {"system_overlap", row.system},
                  {"apparatus_overlap", product(row.apparatus)},
                  {"log_apparatus_overlap", total(row.log_apparatus)}};
        if (per_block) {
          for (std::size_t b = 0; b < e.block_names.size() && b < row.apparatus.size(); ++b) {
            j[e.block_names[b] + "_overlap"] = row.apparatus[b];
          }
        }
        all.push_back(std::move(j));
      }
    }
    write_text(path, all.dump(1) + "\n");
    return;
  }
  auto out = open_out(path);
  out << "ensemble,t,system_overlap,apparatus_overlap,log_apparatus_overlap";
  if (per_block) {
    for (const auto& b : first.block_names) out << ',' << b << "_overlap";
  }
  out << '\n';
  for (const auto& e : r.ensembles) {
    for (const auto& row : e.overlaps) {
      out << e.label << ',' << number(row.t) << ',' << number(row.system) << ',' << number(product(row.apparatus))
          << ',' << number(total(row.log_apparatus));
      if (per_block) {
        for (std::size_t b = 0; b < first.block_names.size(); ++b) {
          out << ',' << (b < row.apparatus.size() ? number(row.apparatus[b]) : "");
        }
      }
      out << '\n';
    }
  }
  finish(out, path);
}

std::vector<fs::path> write_plots(const ScenarioResult& r, const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : r.ensembles) {
    if (e.overlaps.empty()) continue;
    Series sys{"system", {}, {}}, app{"environment", {}, {}};
    for (const auto& row : e.overlaps) {
      sys.x.push_back(row.t);
      sys.y.push_back(std::log10(std::max(row.system, 1e-300)));
      app.x.push_back(row.t);
      double log_total = 0.0;
      for (double l : row.log_apparatus) log_total += l;
      app.y.push_back(log_total / std::log(10.0));
    }
    const fs::path p = dir / ("overlaps_" + safe(e.label) + ".svg");
    write_text(p, svg_plot("Branch overlaps, " + e.label, "t", "log10 overlap", {sys, app}));
    files.push_back(p);
  }
  // Accuracy per ensemble (against N for the optical sweep).
  std::vector<std::string> predictors;
  for (const auto& e : r.ensembles) {
    for (const auto& [name, a] : e.accuracies) {
      if (std::find(predictors.begin(), predictors.end(), name) == predictors.end()) predictors.push_back(name);
    }
  }
  if (!predictors.empty()) {
    std::vector<Series> series;
    std::vector<std::string> ticks;
    for (const auto& e : r.ensembles) ticks.push_back(e.label);
    for (const auto& name : predictors) {
      Series s{name, {}, {}};
      for (std::size_t i = 0; i < r.ensembles.size(); ++i) {
        const auto it = r.ensembles[i].accuracies.find(name);
        if (it == r.ensembles[i].accuracies.end() || !it->second.determined) continue;
        s.x.push_back(static_cast<double>(i));
        s.y.push_back(it->second.fraction);
      }
      series.push_back(std::move(s));
    }
    const bool by_n = r.scenario == "optical_sg";
    const fs::path p = dir / (by_n ? "accuracy_vs_N.svg" : "accuracy.svg");
    write_text(p, svg_plot(by_n ? "Predictor accuracy against N" : "Predictor accuracy", by_n ? "N" : "ensemble",
                           "accuracy", series, ticks));
    files.push_back(p);
  }
  return files;
}

json manifest_json(const RunManifest& m, const std::vector<fs::path>& files) {
  json config = json::object();
  for (const auto& [k, v] : m.config) {
    json value;
    try {
      value = json::parse(v);
    } catch (const json::exception&) {
      value = v;
    }
    config[k] = std::move(value);
  }
  json names = json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  names.push_back("manifest.json");
  return {{"tool", "bohmctx"},
          {"version", BOHMCTX_VERSION},
          {"subcommand", m.subcommand},
          {"scenario", m.scenario},
          {"seed", m.seed},
          {"config", std::move(config)},
          {"threads", m.threads},
          {"started_utc", m.started_utc},
          {"duration_seconds", m.duration_seconds},
          {"files", std::move(names)}};
}

void prepare(const fs::path& dir) { ensure_directory(dir); }

}  // namespace

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
}

json summary_json(const ScenarioResult& result) {
  json j;
  j["scenario"] = result.scenario;
  j["ensembles"] = json::array();
  for (const auto& e : result.ensembles) j["ensembles"].push_back(ensemble_json(e));
  if (!result.regime_table.empty()) {
    j["regime_table"] = json::array();
    for (const auto& row : result.regime_table) {
      json r;
      r["parameters"] = json::object();
      for (const auto& [k, v] : row.parameters) r["parameters"][k] = v;
      r["accuracies"] = json::object();
      for (const auto& [k, a] : row.accuracies) r["accuracies"][k] = accuracy_json(a);
      r["verdict"] = to_string(row.verdict.label);
      j["regime_table"].push_back(std::move(r));
    }
  }
  return j;
}

std::vector<fs::path> write_outputs(const ScenarioResult& result, const RunManifest& manifest,
                                    const OutputOptions& options) {
  const fs::path& dir = options.directory;
  prepare(dir);
  std::vector<fs::path> files;
  const std::string ext = options.format == TableFormat::json ? ".json" : ".csv";

  files.push_back(dir / "summary.json");
  write_text(files.back(), summary_json(result).dump(2) + "\n");

  if (!result.ensembles.empty()) {
    files.push_back(dir / ("runs" + ext));
    write_runs(result, files.back(), options.format);

    // Ensembles sharing the first one's coordinates go in one table; others
    // (the 2D Gordon ensemble) get their own.
    std::vector<const EnsembleReport*> main_group;
    std::vector<const EnsembleReport*> others;
    for (const auto& e : result.ensembles) {
      (e.coordinate_names == result.ensembles.front().coordinate_names ? main_group : others).push_back(&e);
    }
    files.push_back(dir / ("trajectories" + ext));
    write_trajectory_group(main_group, files.back(), options.format, options.max_trajectory_points);
    for (const auto* e : others) {
      files.push_back(dir / ("trajectories_" + safe(e->label) + ext));
      write_trajectory_group({e}, files.back(), options.format, options.max_trajectory_points);
    }

    const bool any_overlaps = std::any_of(result.ensembles.begin(), result.ensembles.end(),
                                          [](const auto& e) { return !e.overlaps.empty(); });
    if (any_overlaps) {
      files.push_back(dir / ("overlaps" + ext));
      write_overlaps(result, files.back(), options.format);
    }
  }
  if (options.plot) {
    for (auto& f : write_plots(result, dir)) files.push_back(std::move(f));
  }
  write_text(dir / "manifest.json", manifest_json(manifest, files).dump(2) + "\n");
  files.push_back(dir / "manifest.json");
  return files;
}

std::vector<fs::path> write_summary_only(const json& summary, const RunManifest& manifest,
                                         const OutputOptions& options) {
  prepare(options.directory);
  std::vector<fs::path> files{options.directory / "summary.json"};
  write_text(files.back(), summary.dump(2) + "\n");
  write_text(options.directory / "manifest.json", manifest_json(manifest, files).dump(2) + "\n");
  files.push_back(options.directory / "manifest.json");
  return files;
}

std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series, const std::vector<std::string>& x_ticks) {
  constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y0 + (y1 - y0) * i / 4.0;
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  if (!x_ticks.empty()) {
    for (std::size_t i = 0; i < x_ticks.size(); ++i) {
      o << "<text x=\"" << px(static_cast<double>(i)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
        << x_ticks[i] << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double x = x0 + (x1 - x0) * i / 4.0;
      o << "<text x=\"" << px(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << x << "</text>\n";
    }
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << x_label
    << "</text>\n";
  o << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = colours[s % 5];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (!std::isfinite(series[s].y[i])) continue;
      o << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    o << "\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(s);
    o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\">" << series[s].name << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace bohmctx::cli
