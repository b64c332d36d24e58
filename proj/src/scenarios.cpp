#include "bohmctx/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bohmctx/analysis.hpp"
#include "bohmctx/errors.hpp"
#include "bohmctx/propagate.hpp"
#include "bohmctx/sampling.hpp"
#include "bohmctx/trajectory.hpp"
#include "bohmctx/wavepacket.hpp"

namespace bohmctx::scenarios {

using numerics::Axis;
using numerics::Coord;
using numerics::Field;
using numerics::Grid;
using numerics::Spinor;
using pointer::ConfigPoint;
using pointer::PointerModel;
using pointer::Schedule;

namespace {

constexpr double kKsBound = 0.05;
// Seed offset for the detector stage so its draws never reuse the grid stream.
constexpr std::uint64_t kDetectorSeedOffset = 0x9e3779b97f4a7c15ULL;

void validate(const CommonConfig& c) {
  if (c.ensemble == 0) throw InvalidInput("ensemble size must be at least 1");
  c.units.validate();
}

Axis axis(const AxisConfig& a) { return Axis{a.points, a.lower, a.upper}; }

std::size_t step_count(double total, double dt, const std::string& what) {
  if (!(dt > 0.0) || !(total > 0.0)) throw InvalidInput(what + ": time and step must be positive");
  const auto n = static_cast<std::size_t>(std::llround(total / dt));
  if (n == 0 || std::abs(static_cast<double>(n) * dt - total) > 1e-9 * total) {
    throw InvalidInput(what + ": step must divide the total time");
  }
  return n;
}

void check_amplitudes(double a, double b, const std::string& what) {
  if (!std::isfinite(a) || !std::isfinite(b) || std::abs(a * a + b * b - 1.0) > 1e-9) {
    throw InvalidInput(what + ": amplitudes must satisfy |a|^2 + |b|^2 = 1");
  }
}

Outcome side_of(double x) {
  if (x > 0.0) return Outcome::plus;
  if (x < 0.0) return Outcome::minus;
  return Outcome::unresolved;
}

// KS bound for an ensemble: the stated 0.05 from n = 1000 up; smaller
// ensembles use the 95% critical value 1.36/sqrt(n).
double ks_bound(std::size_t n) {
  return n >= 1000 ? kKsBound : 1.36 / std::sqrt(static_cast<double>(n));
}

void finish(EnsembleReport& report, const AttributionThresholds& thresholds, bool attribute) {
  analysis::summarize(report);
  if (attribute) report.verdict = analysis::determinant_attribution(report, thresholds);
}

std::vector<double> final_coordinate(std::span<const guidance::Trajectory> trajectories, std::size_t axis_index,
                                     std::size_t expected_size) {
  std::vector<double> out;
  for (const auto& t : trajectories) {
    if (t.size() == expected_size) out.push_back(t.final()[axis_index]);
  }
  return out;
}

void record_ks(EnsembleReport& report, const std::string& name, std::span<const double> endpoints,
               const std::function<double(double)>& cdf) {
  if (endpoints.size() < analysis::kMinKsSamples) return;
  const double ks = analysis::born_rule_ks(endpoints, cdf);
  report.audits[name] = ks;
  report.audit_passed[name] = ks < ks_bound(endpoints.size());
}

std::vector<OverlapRow> pointer_overlaps(const PointerModel& model, std::size_t samples, double t_offset) {
  std::vector<OverlapRow> rows;
  for (const auto& s : pointer::overlap_series(model, samples)) {
    rows.push_back({s.t + t_offset, s.system, s.blocks, s.log_blocks});
  }
  return rows;
}

// Largest relative gap between the apparatus overlap measured as a product of
// per-coordinate overlaps and N log omega.
double exponent_law_error(const PointerModel& model, std::size_t samples) {
  double worst = 0.0;
  const auto& cfg = model.config();
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = cfg.total_time * static_cast<double>(i) / static_cast<double>(samples);
    for (std::size_t k = 0; k < model.block_count(); ++k) {
      const auto& block = cfg.blocks[k];
      const double sigma = model.block_sigma(k, t);
      const double rate = cfg.spreading ? [&] {
        const double tau = cfg.units.hbar / (2 * cfg.units.mass * block.sigma * block.sigma);
        return tau * tau * t / (1 + tau * tau * t * t);
      }() : 0.0;
      double measured = 0.0;
      for (std::size_t j = 0; j < block.count; ++j) {
        const double s0 = cfg.branches[0].apparatus_sign, s1 = cfg.branches[1].apparatus_sign;
        measured += pointer::log_factor_overlap(s0 * block.displacement.value(t), sigma,
                                                s0 * block.displacement.rate(t), rate,
                                                s1 * block.displacement.value(t), sigma,
                                                s1 * block.displacement.rate(t), rate, cfg.units);
      }
      const double law = model.log_apparatus_overlap(t, k);
      worst = std::max(worst, std::abs(measured - law) / std::max(1.0, std::abs(law)));
    }
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Beam splitter

ScenarioResult run_beam_splitter(const BeamSplitterConfig& c) {
  validate(c.common);
  check_amplitudes(c.amplitude_right, c.amplitude_left, "beam splitter");
  const Units& units = c.common.units;
  const Grid grid(axis(c.grid));
  const std::size_t steps = step_count(c.total_time, c.dt, "beam splitter");
  if (c.frame_stride == 0 || steps % c.frame_stride != 0) {
    throw InvalidInput("beam splitter: frame stride must divide the step count");
  }

  const Field right = make_gaussian(grid, {{0.0}, {c.sigma}, {c.wavenumber}, 0.0});
  const Field left = make_gaussian(grid, {{0.0}, {c.sigma}, {-c.wavenumber}, 0.0});
  Field initial = right * c.amplitude_right + left * c.amplitude_left;
  const double scale = 1.0 / numerics::norm(initial);
  initial *= scale;

  // Free evolution is linear: propagate each packet alone and superpose.
  const numerics::PropagationOptions popts{.frame_stride = c.frame_stride};
  const auto run_r = propagate(right, numerics::FreePotential{}, c.dt, steps, units, popts);
  const auto run_l = propagate(left, numerics::FreePotential{}, c.dt, steps, units, popts);
  numerics::Propagation<Field> run{initial, run_r.frame_times, {}};
  for (std::size_t k = 0; k < run_r.frames.size(); ++k) {
    run.frames.push_back((run_r.frames[k] * c.amplitude_right + run_l.frames[k] * c.amplitude_left) * scale);
  }
  run.final_state = run.frames.back();
  for (const auto& f : run.frames) numerics::check_support(f, 0.0);

  // Separation: first frame with disjoint packets at least 8 sigma apart.
  const bool single = c.amplitude_right == 0.0 || c.amplitude_left == 0.0;
  std::optional<std::size_t> k_sep;
  std::vector<OverlapRow> overlaps;
  const std::size_t every = std::max<std::size_t>(1, run.frames.size() / 200);
  for (std::size_t k = 0; k < run.frames.size(); ++k) {
    const double ov = numerics::density_overlap(run_r.frames[k], run_l.frames[k]);
    if (k % every == 0 || k + 1 == run.frames.size()) overlaps.push_back({run.frame_times[k], ov, {1.0}, {0.0}});
    const double gap = numerics::moments(run_r.frames[k]).mean[0] - numerics::moments(run_l.frames[k]).mean[0];
    if (!k_sep && (single || (ov < c.separation_overlap && gap >= c.separation_sigmas * c.sigma))) k_sep = k;
  }
  if (!k_sep) {
    throw SeparationFailure("beam splitter: packets did not separate within the total time");
  }
  const double t_sep = run.frame_times[*k_sep];

  const auto sample = guidance::sample_equilibrium(initial, c.common.ensemble, c.common.seed);
  const auto trajectories = guidance::integrate_trajectories(run, sample.positions, c.trajectory_dt, units,
                                                             {.threads = c.common.threads});
  const std::size_t full_size = trajectories.front().size();
  const std::size_t k_sep_traj = static_cast<std::size_t>(std::llround(t_sep / c.trajectory_dt));
  // Trajectories keep their order, so the top |a_R|^2 of the initial
  // distribution ends up in the right-moving packet.
  const double beta2 = c.amplitude_left * c.amplitude_left;
  const guidance::GridCdf initial_cdf(numerics::density(initial), grid, 0);
  const double split = beta2 == 0.0   ? -std::numeric_limits<double>::infinity()
                       : beta2 == 1.0 ? std::numeric_limits<double>::infinity()
                                      : initial_cdf.quantile(beta2);

  // Detector stage: a pointer attached to the two packets at T_sep.
  const Field& packet = c.amplitude_right != 0.0 ? run_r.frames[*k_sep] : run_l.frames[*k_sep];
  const double velocity = units.hbar_over_mass() * c.wavenumber;
  pointer::PointerModelConfig det;
  det.units = units;
  det.system_sigma = std::sqrt(numerics::moments(packet).variance[0]);
  det.total_time = c.detector.duration;
  det.blocks.push_back({"detector", c.detector.count, c.detector.sigma,
                        Schedule::ramp(0.0, c.detector.ramp_time, 0.0, c.detector.displacement)});
  const double mu_r = numerics::moments(run_r.frames[*k_sep]).mean[0];
  const double mu_l = numerics::moments(run_l.frames[*k_sep]).mean[0];
  det.branches[0] = {Outcome::plus, c.amplitude_right,
                     Schedule{{0.0, c.detector.duration}, {mu_r, mu_r + velocity * c.detector.duration}}, +1};
  det.branches[1] = {Outcome::minus, c.amplitude_left,
                     Schedule{{0.0, c.detector.duration}, {mu_l, mu_l - velocity * c.detector.duration}}, -1};
  const PointerModel detector(det);

  const std::size_t n = trajectories.size();
  auto det_initial = detector.sample(n, c.common.seed + kDetectorSeedOffset);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tr = trajectories[i];
    det_initial[i].x = tr.size() > k_sep_traj ? tr.point(k_sep_traj)[0] : tr.final()[0];
  }
  const auto det_runs = pointer::integrate_pointer(
      detector, det_initial,
      {.dt = c.detector.dt, .ratio_threshold = c.detector.ratio_threshold, .threads = c.common.threads});

  EnsembleReport report;
  report.scenario = "beam_splitter";
  report.label = "default";
  report.plus_name = "D1";
  report.minus_name = "D2";
  report.predictors = {"system", "detector"};
  report.block_names = {"detector"};
  report.parameters = {{"separation_time", t_sep}, {"split_point", split}};
  report.coordinate_names = {"x"};
  std::size_t no_jump = 0, split_rule = 0, branch_mismatch = 0;
  // Which packet a point belongs to once the packets are apart.
  const double midpoint = 0.5 * (mu_r + mu_l);
  auto packet_of = [&](double x) {
    if (c.amplitude_left == 0.0) return Outcome::plus;
    if (c.amplitude_right == 0.0) return Outcome::minus;
    return side_of(x - midpoint);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tr = trajectories[i];
    RunRecord r;
    r.id = i;
    r.system0 = tr.initial()[0];
    r.block_sums0 = {0.0};
    for (double y : det_runs[i].initial.y) r.block_sums0[0] += y;
    r.system_final = tr.final()[0];
    r.failed = tr.failed() || tr.size() <= k_sep_traj;
    r.regularization_events = tr.regularization_events + det_runs[i].path.regularization_events;
    r.outcome = r.failed ? Outcome::unresolved : det_runs[i].outcome;
    const Outcome side = r.system0 > split ? Outcome::plus : r.system0 < split ? Outcome::minus : Outcome::unresolved;
    r.predictions["system"] = side;
    r.predictions["detector"] = detector.predict_block(det_runs[i].initial);
    if (resolved(r.outcome) && r.outcome != side) ++split_rule;
    if (!r.failed) {
      const Outcome at_sep = packet_of(tr.point(k_sep_traj)[0]);
      if (resolved(r.outcome) && r.outcome != at_sep) ++branch_mismatch;
      for (std::size_t k = k_sep_traj; k < tr.size(); ++k) {
        if (packet_of(tr.point(k)[0]) != at_sep) {
          ++no_jump;
          break;
        }
      }
    }
    report.runs.push_back(std::move(r));
  }
  report.trajectories = trajectories;
  report.audits["crossing_violations"] = static_cast<double>(analysis::crossing_audit(trajectories));
  report.audit_passed["crossing_violations"] = report.audits["crossing_violations"] == 0.0;
  report.audits["split_rule_violations"] = static_cast<double>(split_rule);
  report.audit_passed["split_rule_violations"] = split_rule == 0;
  report.audits["no_jump_violations"] = static_cast<double>(no_jump);
  report.audit_passed["no_jump_violations"] = no_jump == 0;
  report.audits["detector_branch_mismatches"] = static_cast<double>(branch_mismatch);
  report.audit_passed["detector_branch_mismatches"] = branch_mismatch == 0;
  const guidance::GridCdf final_cdf(numerics::density(run.final_state), grid, 0);
  const auto ends = final_coordinate(trajectories, 0, full_size);
  record_ks(report, "born_ks", ends, [&](double x) { return final_cdf.cdf(x); });

  for (auto& row : pointer_overlaps(detector, 50, t_sep)) overlaps.push_back(std::move(row));
  std::stable_sort(overlaps.begin(), overlaps.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  report.overlaps = std::move(overlaps);
  finish(report, c.common.thresholds, true);
  return {"beam_splitter", {std::move(report)}, {}};
}

// ---------------------------------------------------------------------------
// Stern-Gerlach

namespace {

struct SideMap {
  Outcome positive = Outcome::unresolved;
  Outcome negative = Outcome::unresolved;
  Outcome of(double z) const {
    if (z > 0.0) return positive;
    if (z < 0.0) return negative;
    return Outcome::unresolved;
  }
};

// Which spin component owns each side of z = 0 at the end of the flight.
SideMap side_map(const Spinor& s, double tolerance) {
  const Grid& g = s.grid();
  const int zaxis = g.gradient_axis();
  double up_pos = 0, up_neg = 0, down_pos = 0, down_neg = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double z = g.coordinate(i)[static_cast<std::size_t>(zaxis)];
    const double u = std::norm(s.up[i]), d = std::norm(s.down[i]);
    if (z > 0) {
      up_pos += u;
      down_pos += d;
    } else if (z < 0) {
      up_neg += u;
      down_neg += d;
    }
  }
  auto owner = [&](double up, double down) {
    const double total = up + down;
    if (!(total > 0.0)) return Outcome::unresolved;
    if (std::min(up, down) > tolerance * total) {
      throw SeparationFailure("stern-gerlach: spin branches did not separate (gradient too weak for the flight time)");
    }
    return up >= down ? Outcome::plus : Outcome::minus;
  };
  return {owner(up_pos, down_pos), owner(up_neg, down_neg)};
}

Spinor sg_spinor(const Grid& g, const SternGerlachConfig& c) {
  const bool two_d = g.dims() == 2;
  const numerics::GaussianPacket packet =
      two_d ? numerics::GaussianPacket{{0.0, 0.0}, {c.sigma_y, c.sigma_z}, {0.0, 0.0}, 0.0}
            : numerics::GaussianPacket{{0.0}, {c.sigma_z}, {0.0}, 0.0};
  const Field f = make_gaussian(g, packet);
  return Spinor(f * c.alpha, f * std::polar(c.beta, c.beta_phase));
}

struct SgRun {
  std::vector<guidance::Trajectory> trajectories;
  SideMap map;
  Spinor final_state;
};

SgRun sg_run_1d(const SternGerlachConfig& c, double gradient, std::span<const Coord> positions) {
  const Grid g(axis(c.z));
  const Spinor s = sg_spinor(g, c);
  const std::size_t steps = step_count(c.flight_time, c.dt, "stern-gerlach");
  const auto run = propagate(s, numerics::LinearSpinPotential{gradient, c.offset}, c.dt, steps, c.common.units,
                             {.frame_stride = c.frame_stride});
  auto trajectories = guidance::integrate_trajectories(run, guidance::VelocityModel::spinor_convective, positions,
                                                       c.trajectory_dt, c.common.units, {.threads = c.common.threads});
  return {std::move(trajectories), side_map(run.final_state, c.separation_tolerance), run.final_state};
}

EnsembleReport sg_report(const std::string& label, const SternGerlachConfig& c, double gradient,
                         const std::vector<guidance::Trajectory>& trajectories, const SideMap& map,
                         std::size_t z_index, const Spinor& final_state) {
  EnsembleReport report;
  report.scenario = "stern_gerlach";
  report.label = label;
  report.plus_name = "+hbar/2";
  report.minus_name = "-hbar/2";
  report.predictors = {"system"};
  report.parameters = {{"gradient", gradient}, {"alpha", c.alpha}, {"beta", c.beta}};
  report.coordinate_names = z_index == 0 ? std::vector<std::string>{"z"} : std::vector<std::string>{"y", "z"};
  const std::size_t full = trajectories.empty() ? 0 : trajectories.front().size();
  std::size_t rule = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& tr = trajectories[i];
    RunRecord r;
    r.id = i;
    r.system0 = tr.initial()[z_index];
    r.system_final = tr.final()[z_index];
    r.failed = tr.failed();
    r.regularization_events = tr.regularization_events;
    r.outcome = r.failed ? Outcome::unresolved : map.of(r.system_final);
    r.predictions["system"] = map.of(r.system0);
    if (resolved(r.outcome) && r.outcome != r.predictions["system"]) ++rule;
    report.runs.push_back(std::move(r));
  }
  report.audits["initial_side_rule_violations"] = static_cast<double>(rule);
  report.audit_passed["initial_side_rule_violations"] = rule == 0;
  const guidance::GridCdf cdf(numerics::density(final_state), final_state.grid(), static_cast<int>(z_index));
  const auto ends = final_coordinate(trajectories, z_index, full);
  record_ks(report, "born_ks", ends, [&](double z) { return cdf.cdf(z); });
  report.trajectories = trajectories;
  return report;
}

}  // namespace

ScenarioResult run_stern_gerlach(const SternGerlachConfig& c) {
  validate(c.common);
  check_amplitudes(c.alpha, c.beta, "stern-gerlach");
  ScenarioResult result{"stern_gerlach", {}, {}};

  const Grid gz(axis(c.z));
  const Spinor s1 = sg_spinor(gz, c);
  const auto sample = guidance::sample_equilibrium(s1, c.common.ensemble, c.common.seed);

  const SgRun main = sg_run_1d(c, c.gradient, sample.positions);
  EnsembleReport report = sg_report("gradient", c, c.gradient, main.trajectories, main.map, 0, main.final_state);
  if (report.trajectories.size() > 1) {
    report.audits["crossing_violations"] = static_cast<double>(analysis::crossing_audit(report.trajectories));
    report.audit_passed["crossing_violations"] = report.audits["crossing_violations"] == 0.0;
  }

  if (c.inverted_twin) {
    const SgRun twin = sg_run_1d(c, -c.gradient, sample.positions);
    EnsembleReport inverted = sg_report("inverted", c, -c.gradient, twin.trajectories, twin.map, 0, twin.final_state);
    std::size_t pairing = 0;
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
      const auto& a = report.runs[i];
      const auto& b = inverted.runs[i];
      if (!resolved(a.outcome) || !resolved(b.outcome)) continue;
      const bool swapped = b.outcome == opposite(a.outcome);
      const bool same_side = side_of(a.system_final) == side_of(b.system_final);
      if (!swapped || !same_side) ++pairing;
    }
    report.audits["inversion_pairing_violations"] = static_cast<double>(pairing);
    report.audit_passed["inversion_pairing_violations"] = pairing == 0;
    finish(inverted, c.common.thresholds, false);
    finish(report, c.common.thresholds, false);
    result.ensembles.push_back(std::move(report));
    result.ensembles.push_back(std::move(inverted));
  } else {
    finish(report, c.common.thresholds, false);
    result.ensembles.push_back(std::move(report));
  }

  if (c.gordon) {
    const Grid g2(axis(c.y), axis(c.z));
    const Spinor s2 = sg_spinor(g2, c);
    const auto sample2 = guidance::sample_equilibrium(s2, c.common.ensemble, c.common.seed);
    const std::size_t steps = step_count(c.flight_time, c.dt, "stern-gerlach");
    const numerics::LinearSpinPotential pot{c.gradient, c.offset};
    auto integrate = [&](bool convective_only) {
      guidance::StreamingFrames frames(s2, pot, c.dt, steps, c.frame_stride,
                                       guidance::VelocityModel::spinor_with_gordon, c.common.units);
      auto tr = guidance::integrate_trajectories(frames, sample2.positions, c.trajectory_dt,
                                                 {.threads = c.common.threads, .convective_only = convective_only});
      // Finish the propagation so the final state is available.
      frames.frame(frames.count() - 1);
      return std::make_pair(std::move(tr), frames.state());
    };
    auto [with, final_with] = integrate(false);
    auto [without, final_without] = integrate(true);
    const SideMap map = side_map(final_with, c.separation_tolerance);
    EnsembleReport gordon = sg_report("gordon", c, c.gradient, with, map, 1, final_with);
    std::size_t mismatches = 0;
    double largest_shift = 0.0;
    for (std::size_t i = 0; i < with.size(); ++i) {
      const Outcome a = with[i].failed() ? Outcome::unresolved : map.of(with[i].final()[1]);
      const Outcome b = without[i].failed() ? Outcome::unresolved : map.of(without[i].final()[1]);
      if (!resolved(a) || !resolved(b)) continue;
      if (a != b) ++mismatches;
      largest_shift = std::max(largest_shift, std::abs(with[i].final()[1] - without[i].final()[1]));
    }
    gordon.audits["gordon_side_mismatches"] = static_cast<double>(mismatches);
    gordon.audit_passed["gordon_side_mismatches"] = mismatches == 0;
    gordon.audits["gordon_max_z_shift"] = largest_shift;
    finish(gordon, c.common.thresholds, false);
    result.ensembles.push_back(std::move(gordon));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Optical Stern-Gerlach

pointer::PointerModelConfig optical_sg_model(const OpticalSgConfig& c, std::size_t count) {
  if (!(c.ramp_time > 0.0) || !(c.ramp_time < c.total_time)) {
    throw InvalidInput("optical-sg: ramp time must lie inside (0, T)");
  }
  pointer::PointerModelConfig m;
  m.units = c.common.units;
  m.system_sigma = c.system_sigma;
  m.total_time = c.total_time;
  m.spreading = c.spreading;
  m.form = c.form;
  m.blocks.push_back({"apparatus", count, c.apparatus_sigma, Schedule::ramp(0.0, c.ramp_time, 0.0, c.displacement)});
  const double after_ramp = c.initial_half_separation + c.recoil_speed * c.ramp_time;
  const double at_end = std::max(after_ramp, c.final_half_separation);
  for (int s : {+1, -1}) {
    pointer::Branch b;
    b.label = s > 0 ? Outcome::plus : Outcome::minus;
    b.amplitude = s > 0 ? c.amplitude_plus : c.amplitude_minus;
    b.apparatus_sign = s;
    b.system_center = Schedule{{0.0, c.ramp_time, c.total_time},
                               {s * c.initial_half_separation, s * after_ramp, s * at_end}};
    m.branches[s > 0 ? 0 : 1] = b;
  }
  return m;
}

namespace {

EnsembleReport pointer_ensemble(const std::string& scenario, const std::string& label, const PointerModel& model,
                                const CommonConfig& common, double dt, double ratio, std::size_t overlap_samples) {
  const auto initial = model.sample(common.ensemble, common.seed);
  const auto runs = pointer::integrate_pointer(model, initial,
                                               {.dt = dt, .ratio_threshold = ratio, .threads = common.threads});
  EnsembleReport report;
  report.scenario = scenario;
  report.label = label;
  report.predictors = {"system"};
  report.coordinate_names = {"x"};
  for (const auto& block : model.config().blocks) {
    report.predictors.push_back(block.name);
    report.block_names.push_back(block.name);
    report.coordinate_names.push_back(block.name + "_sum");
  }
  std::vector<double> ends;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    RunRecord r;
    r.id = i;
    r.system0 = run.initial.x;
    r.system_final = run.final.x;
    r.outcome = run.outcome;
    r.regularization_events = run.path.regularization_events;
    r.predictions["system"] = model.predict_system(run.initial.x);
    for (std::size_t k = 0; k < model.block_count(); ++k) {
      double sum = 0.0;
      for (std::size_t j = model.block_offset(k); j < model.block_offset(k + 1); ++j) sum += run.initial.y[j];
      r.block_sums0.push_back(sum);
      r.predictions[model.config().blocks[k].name] = model.predict_block(run.initial, k);
    }
    ends.push_back(run.final.x);
    report.runs.push_back(std::move(r));
    report.trajectories.push_back(run.path);
  }
  const double t_end = model.config().total_time;
  record_ks(report, "born_ks", ends, [&](double x) { return model.system_marginal_cdf(x, t_end); });
  report.audits["overlap_exponent_law_error"] = exponent_law_error(model, overlap_samples);
  report.audit_passed["overlap_exponent_law_error"] = report.audits["overlap_exponent_law_error"] <= 1e-12;
  report.overlaps = pointer_overlaps(model, overlap_samples, 0.0);
  finish(report, common.thresholds, true);
  report.audits["unresolved_fraction"] =
      static_cast<double>(report.unresolved) / static_cast<double>(report.runs.size());
  return report;
}

}  // namespace

ScenarioResult run_optical_sg(const OpticalSgConfig& c) {
  validate(c.common);
  check_amplitudes(c.amplitude_plus, c.amplitude_minus, "optical-sg");
  if (c.counts.empty()) throw InvalidInput("optical-sg: the N sweep is empty");
  ScenarioResult result{"optical_sg", {}, {}};
  for (std::size_t n : c.counts) {
    const PointerModel model(optical_sg_model(c, n));
    auto report = pointer_ensemble("optical_sg", "N=" + std::to_string(n), model, c.common, c.dt,
                                   c.ratio_threshold, c.overlap_samples);
    report.parameters = {{"N", static_cast<double>(n)},
                         {"recoil_speed", c.recoil_speed},
                         {"initial_half_separation", c.initial_half_separation}};
    result.ensembles.push_back(std::move(report));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Ancilla chain

pointer::PointerModelConfig ancilla_model(const AncillaConfig& c) {
  if (!(c.stage1_end > 0.0) || !(c.stage2_end > c.stage1_end)) {
    throw InvalidInput("ancilla: stage windows need 0 < t1 < t2");
  }
  if (c.ancilla_count == 0 || c.apparatus_count == 0) {
    throw InvalidInput("ancilla: N' and N must be at least 1");
  }
  pointer::PointerModelConfig m;
  m.units = c.common.units;
  m.system_sigma = c.system_sigma;
  m.total_time = c.stage2_end;
  m.blocks.push_back({"ancilla", c.ancilla_count, c.ancilla_sigma,
                      Schedule::ramp(0.0, c.stage1_end, 0.0, c.ancilla_displacement)});
  m.blocks.push_back({"apparatus", c.apparatus_count, c.apparatus_sigma,
                      Schedule{{c.stage1_end, c.stage2_end}, {0.0, c.apparatus_displacement}}});
  const double h0 = 0.5 * c.separation;
  const double h1 = h0 + c.stage1_recoil * c.stage1_end;
  const double half = 1.0 / std::numbers::sqrt2;
  for (int s : {+1, -1}) {
    pointer::Branch b;
    b.label = s > 0 ? Outcome::plus : Outcome::minus;
    b.amplitude = half;
    b.apparatus_sign = s;
    b.system_center = Schedule{{0.0, c.stage1_end, c.stage2_end}, {s * h0, s * h1, s * h1}};
    m.branches[s > 0 ? 0 : 1] = b;
  }
  return m;
}

EnsembleReport run_ancilla_ensemble(const AncillaConfig& c) {
  validate(c.common);
  const PointerModel model(ancilla_model(c));
  auto report = pointer_ensemble("ancilla_chain", "default", model, c.common, c.dt, c.ratio_threshold,
                                 c.overlap_samples);
  report.parameters = {{"N_prime", static_cast<double>(c.ancilla_count)},
                       {"N", static_cast<double>(c.apparatus_count)},
                       {"separation", c.separation},
                       {"stage1_recoil", c.stage1_recoil},
                       {"initial_system_overlap", model.system_overlap(0.0)}};
  return report;
}

ScenarioResult run_ancilla_chain(const AncillaConfig& c) {
  ScenarioResult result{"ancilla_chain", {run_ancilla_ensemble(c)}, {}};
  for (std::size_t np : c.sweep_counts) {
    for (double d : c.sweep_separations) {
      for (double v : c.sweep_recoils) {
        AncillaConfig point = c;
        point.ancilla_count = np;
        point.separation = d;
        point.stage1_recoil = v;
        const EnsembleReport e = run_ancilla_ensemble(point);
        RegimeRow row;
        row.parameters = e.parameters;
        row.accuracies = e.accuracies;
        row.verdict = e.verdict.value_or(AttributionVerdict{});
        result.regime_table.push_back(std::move(row));
      }
    }
  }
  return result;
}

}  // namespace bohmctx::scenarios
