#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bohmctx/grid.hpp"
#include "bohmctx/outcome.hpp"
#include "bohmctx/trajectory.hpp"

namespace bohmctx::pointer {

using numerics::Units;
using Complex = std::complex<double>;

/// Piecewise-linear function of time through (times[i], values[i]), constant
/// outside the knot range. rate() is the left derivative, so it is zero at
/// and before the first knot.
struct Schedule {
  std::vector<double> times;
  std::vector<double> values;

  static Schedule constant(double value);
  /// from -> to linearly over [t0, t1].
  static Schedule ramp(double t0, double t1, double from, double to);

  double value(double t) const;
  double rate(double t) const;
  void validate(const std::string& what) const;
};

/// N identical apparatus coordinates displaced by +/- a(t) depending on the
/// branch.
struct ApparatusBlock {
  std::string name = "apparatus";
  std::size_t count = 1;
  double sigma = 1.0;
  Schedule displacement = Schedule::constant(0.0);
};

struct Branch {
  Outcome label = Outcome::plus;
  Complex amplitude{1.0, 0.0};
  Schedule system_center = Schedule::constant(0.0);
  int apparatus_sign = +1;  // applied to every block
};

enum class VelocityForm {
  /// Branches carry orthogonal internal states (spin): v = sum_b w_b v_b / sum_b w_b.
  internal_state,
  /// Scalar superposition: v = (hbar/m) Im(sum c_b dPhi_b / sum c_b Phi_b).
  coherent,
};

struct PointerModelConfig {
  Units units;
  double system_sigma = 1.0;
  std::vector<ApparatusBlock> blocks;
  std::array<Branch, 2> branches{};
  double total_time = 1.0;
  /// Widths follow the free-Gaussian law sigma(t) when on; rigid otherwise.
  bool spreading = false;
  VelocityForm form = VelocityForm::internal_state;

  void validate() const;
};

/// One point of configuration space: x plus every apparatus coordinate, block
/// by block.
struct ConfigPoint {
  double x = 0.0;
  std::vector<double> y;
};

struct PointerVelocity {
  ConfigPoint velocity;
  bool regularized = false;
};

class PointerModel {
 public:
  explicit PointerModel(PointerModelConfig config);

  const PointerModelConfig& config() const { return config_; }
  std::size_t apparatus_size() const { return offsets_.back(); }
  std::size_t block_offset(std::size_t k) const { return offsets_[k]; }
  std::size_t block_count() const { return config_.blocks.size(); }

  double system_sigma(double t) const;
  double block_sigma(std::size_t k, double t) const;

  /// log(|c_b|^2 |phi_b(x)|^2 prod |g_b(y_j)|^2); -inf for a zero amplitude.
  std::array<double, 2> log_weights(const ConfigPoint& p, double t) const;
  std::array<double, 2> branch_local_weight(const ConfigPoint& p, double t) const;

  /// Regularized (and returning zeros) only when no branch weight is above
  /// the smallest normal double.
  PointerVelocity velocity(const ConfigPoint& p, double t) const;

  /// Magnitude of the overlap of the two system factors.
  double system_overlap(double t) const;
  /// log of the single-coordinate overlap magnitude omega(t) of block k.
  double log_omega(double t, std::size_t block = 0) const;
  /// N log omega(t) for block k; stays finite where the overlap underflows.
  double log_apparatus_overlap(double t, std::size_t block = 0) const;
  /// exp(N log omega(t)) for block k.
  double apparatus_overlap(double t, std::size_t block = 0) const;

  /// Branch with the larger weight if it wins by at least ratio_threshold.
  Outcome classify(const ConfigPoint& p, double t, double ratio_threshold = 1e6) const;
  /// Side of x0 relative to the midpoint of the initial system centres,
  /// mapped to the branch whose centre ends up on that side (or, if the
  /// centres never move apart, to the branch with apparatus sign of that side).
  Outcome predict_system(double x0) const;
  /// Sign of the block's coordinate sum, mapped by the branch displacement
  /// direction at t = T.
  Outcome predict_block(const ConfigPoint& p0, std::size_t block = 0) const;

  /// Exact x-marginal CDF of the branch-weighted density at time t.
  double system_marginal_cdf(double x, double t) const;

  /// n points from the t = 0 density; point i uses stream_rng(seed, i).
  std::vector<ConfigPoint> sample(std::size_t n, std::uint64_t seed) const;

 private:
  struct Factor {
    double center, sigma, center_rate, sigma_rate;
  };
  Factor system_factor(std::size_t b, double t) const;
  Factor block_factor(std::size_t b, std::size_t k, double t) const;
  PointerVelocity internal_velocity(const ConfigPoint& p, double t) const;
  PointerVelocity coherent_velocity(const ConfigPoint& p, double t) const;

  PointerModelConfig config_;
  std::vector<std::size_t> offsets_;
};

/// Log of |<f1|f2>| for two Gaussian factors including their plane-wave and
/// chirp phases. Exposed for testing.
double log_factor_overlap(double c1, double s1, double v1, double r1, double c2, double s2,
                          double v2, double r2, const Units& units);

struct PointerRun {
  ConfigPoint initial;
  ConfigPoint final;
  /// Reduced path: coordinates are x, then the sum of each block.
  guidance::Trajectory path;
  /// Every coordinate at every recorded time; only when requested.
  std::vector<ConfigPoint> full;
  Outcome outcome = Outcome::unresolved;
};

struct PointerIntegration {
  double dt = 0.01;
  double ratio_threshold = 1e6;
  bool record_full = false;
  std::size_t threads = 0;
};

/// RK4 from t = 0 to T for each initial point; classification at T.
std::vector<PointerRun> integrate_pointer(const PointerModel& model,
                                          std::span<const ConfigPoint> initial,
                                          const PointerIntegration& options);

struct OverlapSample {
  double t = 0.0;
  double system = 1.0;
  std::vector<double> blocks;      // apparatus overlap per block
  std::vector<double> log_blocks;  // its logarithm
};
std::vector<OverlapSample> overlap_series(const PointerModel& model, std::size_t samples);

}  // namespace bohmctx::pointer
