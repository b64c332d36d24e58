#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bohmctx/scenarios.hpp"

namespace bohmctx::cli {

using scenarios::AncillaConfig;
using scenarios::AxisConfig;
using scenarios::BeamSplitterConfig;
using scenarios::CommonConfig;
using scenarios::DetectorConfig;
using scenarios::OpticalSgConfig;
using scenarios::SternGerlachConfig;

// Every config key, bound once. A visitor is called as v(key, field, doc).

template <class V>
void bind(V& v, CommonConfig& c) {
  v("ensemble", c.ensemble, "ensemble size n");
  v("seed", c.seed, "RNG seed; trajectory i uses its own stream derived from it");
  v("threads", c.threads, "worker threads (0: BOHMCTX_THREADS or all cores)");
  v("units.hbar", c.units.hbar, "reduced Planck constant");
  v("units.mass", c.units.mass, "particle mass");
  v("thresholds.determined", c.thresholds.determined, "accuracy at or above which a predictor determines the outcome");
  v("thresholds.chance", c.thresholds.chance, "accuracy at or below which a predictor is at chance");
}

template <class V>
void bind(V& v, const std::string& prefix, AxisConfig& a) {
  v(prefix + ".points", a.points, "grid points");
  v(prefix + ".lower", a.lower, "lower edge of the periodic domain");
  v(prefix + ".upper", a.upper, "upper edge (excluded)");
}

template <class V>
void bind(V& v, DetectorConfig& d) {
  v("detector.count", d.count, "pointer particles per detector");
  v("detector.sigma", d.sigma, "pointer particle width");
  v("detector.displacement", d.displacement, "final pointer displacement");
  v("detector.ramp_time", d.ramp_time, "time for the displacement ramp");
  v("detector.duration", d.duration, "length of the detector stage");
  v("detector.dt", d.dt, "RK4 step of the detector stage");
  v("detector.ratio_threshold", d.ratio_threshold, "weight ratio that resolves an outcome");
}

template <class V>
void bind(V& v, BeamSplitterConfig& c) {
  bind(v, c.common);
  bind(v, "grid", c.grid);
  v("sigma", c.sigma, "initial packet width");
  v("wavenumber", c.wavenumber, "packet wavenumber k (packets move at +-hbar k / m)");
  v("amplitude_right", c.amplitude_right, "amplitude of the right-moving packet (towards D1)");
  v("amplitude_left", c.amplitude_left, "amplitude of the left-moving packet (towards D2)");
  v("dt", c.dt, "propagation step");
  v("frame_stride", c.frame_stride, "steps between stored frames");
  v("total_time", c.total_time, "propagation time T");
  v("trajectory_dt", c.trajectory_dt, "RK4 step for trajectories");
  v("separation_overlap", c.separation_overlap, "packet overlap below which the packets count as separated");
  v("separation_sigmas", c.separation_sigmas, "minimum centre distance at separation, in units of sigma");
  bind(v, c.detector);
}

template <class V>
void bind(V& v, SternGerlachConfig& c) {
  bind(v, c.common);
  bind(v, "z", c.z);
  bind(v, "y", c.y);
  v("sigma_z", c.sigma_z, "packet width along the gradient");
  v("sigma_y", c.sigma_y, "transverse packet width (2D runs)");
  v("alpha", c.alpha, "spin-up amplitude");
  v("beta", c.beta, "spin-down amplitude");
  v("beta_phase", c.beta_phase, "relative phase of the spin-down amplitude");
  v("gradient", c.gradient, "field gradient b; the sign sets the orientation");
  v("offset", c.offset, "uniform field B0");
  v("flight_time", c.flight_time, "time in the field");
  v("dt", c.dt, "propagation step");
  v("frame_stride", c.frame_stride, "steps between frames");
  v("trajectory_dt", c.trajectory_dt, "RK4 step for trajectories");
  v("gordon", c.gordon, "also run the 2D (y,z) ensemble with the Gordon term");
  v("inverted_twin", c.inverted_twin, "also run b -> -b on the same samples");
  v("separation_tolerance", c.separation_tolerance, "largest minority mass fraction on a side");
}

template <class V>
void bind(V& v, OpticalSgConfig& c) {
  bind(v, c.common);
  v("counts", c.counts, "apparatus particle counts N to sweep");
  v("system_sigma", c.system_sigma, "system branch width");
  v("apparatus_sigma", c.apparatus_sigma, "apparatus particle width");
  v("displacement", c.displacement, "final apparatus displacement a");
  v("ramp_time", c.ramp_time, "coupling ramp duration");
  v("recoil_speed", c.recoil_speed, "system branch speed during the ramp");
  v("initial_half_separation", c.initial_half_separation, "half distance of the system branches at t = 0");
  v("final_half_separation", c.final_half_separation, "half distance of the system branches at T");
  v("total_time", c.total_time, "run time T");
  v("dt", c.dt, "RK4 step");
  v("amplitude_plus", c.amplitude_plus, "amplitude of the + branch");
  v("amplitude_minus", c.amplitude_minus, "amplitude of the - branch");
  v("spreading", c.spreading, "let the Gaussian factors spread freely");
  v("form", c.form, "velocity form: internal_state or coherent");
  v("ratio_threshold", c.ratio_threshold, "weight ratio that resolves an outcome");
  v("overlap_samples", c.overlap_samples, "points in the overlap time series");
}

template <class V>
void bind(V& v, AncillaConfig& c) {
  bind(v, c.common);
  v("ancilla_count", c.ancilla_count, "ancilla particle count N'");
  v("apparatus_count", c.apparatus_count, "apparatus particle count N");
  v("system_sigma", c.system_sigma, "system branch width");
  v("ancilla_sigma", c.ancilla_sigma, "ancilla particle width");
  v("apparatus_sigma", c.apparatus_sigma, "apparatus particle width");
  v("ancilla_displacement", c.ancilla_displacement, "ancilla displacement at the end of stage 1");
  v("apparatus_displacement", c.apparatus_displacement, "apparatus displacement at the end of stage 2");
  v("stage1_end", c.stage1_end, "t1: end of the system-ancilla coupling");
  v("stage2_end", c.stage2_end, "t2: end of the ancilla-apparatus coupling");
  v("separation", c.separation, "distance between the system branch centres at t = 0");
  v("stage1_recoil", c.stage1_recoil, "system branch speed during stage 1");
  v("dt", c.dt, "RK4 step");
  v("ratio_threshold", c.ratio_threshold, "weight ratio that resolves an outcome");
  v("overlap_samples", c.overlap_samples, "points in the overlap time series");
  v("sweep_counts", c.sweep_counts, "N' values of the regime map");
  v("sweep_separations", c.sweep_separations, "system separations of the regime map");
  v("sweep_recoils", c.sweep_recoils, "stage-1 speeds of the regime map");
}

/// Keys and values of a config file. Nested maps are flattened to dotted
/// keys, so `detector: {count: 4}` and `detector.count: 4` agree. Unknown
/// keys and badly typed values are InvalidInput.
class ConfigSource {
 public:
  static ConfigSource from_file(const std::filesystem::path& path);
  static ConfigSource from_text(const std::string& text);

  bool has(const std::string& key) const { return values_.contains(key); }
  /// Removes and returns the `scenario` key ("" if absent).
  std::string take_scenario();

  /// Sets every bound field present in the source. Throws on leftover keys.
  template <class Config>
  void apply(Config& config) const;

 private:
  std::map<std::string, std::string> values_;  // key -> YAML text of the value
};

/// Flat `key: value` text, one doc comment per key, starting with the
/// scenario key. Parsing it back gives the same config.
template <class Config>
std::string serialize(Config config);

/// Key -> value text pairs in binding order, as written by serialize.
template <class Config>
std::vector<std::pair<std::string, std::string>> flatten(Config config);

inline std::string scenario_of(const BeamSplitterConfig&) { return "beam_splitter"; }
inline std::string scenario_of(const SternGerlachConfig&) { return "stern_gerlach"; }
inline std::string scenario_of(const OpticalSgConfig&) { return "optical_sg"; }
inline std::string scenario_of(const AncillaConfig&) { return "ancilla_chain"; }

}  // namespace bohmctx::cli
