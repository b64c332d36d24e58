#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bohmctx/grid.hpp"
#include "bohmctx/pointer_model.hpp"
#include "bohmctx/report.hpp"

namespace bohmctx::scenarios {

using numerics::Units;

/// Every physics default lives in these structs.

struct AxisConfig {
  std::size_t points = 1024;
  double lower = -32.0;
  double upper = 32.0;
};

struct CommonConfig {
  std::size_t ensemble = 1000;
  std::uint64_t seed = 1;
  Units units;
  AttributionThresholds thresholds;
  std::size_t threads = 0;  // 0: BOHMCTX_THREADS or hardware concurrency
};

/// Pointer stage that records which packet the particle is in.
struct DetectorConfig {
  std::size_t count = 16;
  double sigma = 1.0;
  double displacement = 4.0;
  double ramp_time = 1.0;
  double duration = 1.5;
  double dt = 0.01;
  double ratio_threshold = 1e6;
};

struct BeamSplitterConfig {
  CommonConfig common;
  AxisConfig grid;
  double sigma = 1.0;
  double wavenumber = 5.0;
  /// Amplitudes of the e^{+ikx} (towards D1) and e^{-ikx} (towards D2) parts.
  double amplitude_right = 0.70710678118654752;
  double amplitude_left = 0.70710678118654752;
  /// Fine steps keep trajectories near the interference nodes ordered.
  double dt = 0.0005;
  std::size_t frame_stride = 1;
  double total_time = 2.0;
  double trajectory_dt = 0.0005;
  double separation_overlap = 1e-6;
  double separation_sigmas = 8.0;
  DetectorConfig detector;
};

struct SternGerlachConfig {
  CommonConfig common;
  AxisConfig z{4096, -128.0, 128.0};
  AxisConfig y{64, -9600.0, 9600.0};
  double sigma_z = 10.0;
  /// Wide transverse beam: the Gordon z-velocity scales like y / sigma_y^2.
  double sigma_y = 1000.0;
  /// Spin amplitudes (alpha, beta); beta may carry a relative phase.
  double alpha = 0.70710678118654752;
  double beta = 0.70710678118654752;
  double beta_phase = 0.0;
  double gradient = 22.0;
  double offset = 0.0;
  double flight_time = 3.0;
  double dt = 0.005;
  std::size_t frame_stride = 3;
  double trajectory_dt = 0.015;
  bool gordon = false;
  /// Run the b -> -b twin on the same samples.
  bool inverted_twin = true;
  /// Largest mass fraction of the minority component on the side it does not
  /// own; above this the branches have not separated.
  double separation_tolerance = 1e-6;
};

struct OpticalSgConfig {
  CommonConfig common{.ensemble = 500, .seed = 1, .units = {}, .thresholds = {}, .threads = 0};
  std::vector<std::size_t> counts{1, 4, 16, 64};
  double system_sigma = 1.0;
  double apparatus_sigma = 1.0;
  double displacement = 4.0;
  double ramp_time = 1.0;
  /// System branch speed during the ramp (0: branches stay co-located).
  double recoil_speed = 0.0;
  /// Half distance of the system branch centres at t = 0.
  double initial_half_separation = 0.0;
  /// Half distance the branches reach at T after the ramp (unless pre-separated).
  double final_half_separation = 4.0;
  double total_time = 2.0;
  double dt = 0.01;
  double amplitude_plus = 0.70710678118654752;
  double amplitude_minus = 0.70710678118654752;
  bool spreading = false;
  pointer::VelocityForm form = pointer::VelocityForm::internal_state;
  double ratio_threshold = 1e6;
  std::size_t overlap_samples = 200;
};

struct AncillaConfig {
  CommonConfig common{.ensemble = 500, .seed = 1, .units = {}, .thresholds = {}, .threads = 0};
  std::size_t ancilla_count = 64;
  std::size_t apparatus_count = 16;
  double system_sigma = 1.0;
  double ancilla_sigma = 1.0;
  double apparatus_sigma = 1.0;
  double ancilla_displacement = 4.0;
  double apparatus_displacement = 4.0;
  double stage1_end = 1.0;
  double stage2_end = 3.0;
  /// Distance between the system branch centres, held fixed.
  double separation = 0.0;
  /// System branch speed (each, opposite signs) during stage 1.
  double stage1_recoil = 0.0;
  double dt = 0.01;
  double ratio_threshold = 1e6;
  std::size_t overlap_samples = 200;
  /// Regime map grid; empty lists skip the sweep.
  std::vector<std::size_t> sweep_counts{1, 4, 16, 64};
  std::vector<double> sweep_separations{0.0, 0.5, 1.0, 2.0, 8.0};
  std::vector<double> sweep_recoils{0.0};
};

struct BornCheckConfig {
  /// One of beam_splitter, stern_gerlach, optical_sg, ancilla_chain.
  std::string scenario = "beam_splitter";
  std::size_t ensemble = 2000;
};

ScenarioResult run_beam_splitter(const BeamSplitterConfig& config);
ScenarioResult run_stern_gerlach(const SternGerlachConfig& config);
ScenarioResult run_optical_sg(const OpticalSgConfig& config);
ScenarioResult run_ancilla_chain(const AncillaConfig& config);

/// Pointer model for one optical-SG ensemble with N apparatus particles.
pointer::PointerModelConfig optical_sg_model(const OpticalSgConfig& config, std::size_t count);
/// Three-block model (system, ancilla, apparatus) for the ancilla chain.
pointer::PointerModelConfig ancilla_model(const AncillaConfig& config);
/// One ancilla ensemble at the configured parameters (no sweep).
EnsembleReport run_ancilla_ensemble(const AncillaConfig& config);

}  // namespace bohmctx::scenarios
