#include "bohmctx/pointer_model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "bohmctx/errors.hpp"
#include "bohmctx/guidance.hpp"
#include "bohmctx/parallel.hpp"
#include "bohmctx/sampling.hpp"

namespace bohmctx::pointer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogFloor = std::log(DBL_MIN);

double log_gauss_density(double q, double c, double s) {
  const double u = (q - c) / s;
  return -0.5 * u * u - 0.5 * std::log(2.0 * std::numbers::pi * s * s);
}

}  // namespace

Schedule Schedule::constant(double value) { return Schedule{{0.0}, {value}}; }

Schedule Schedule::ramp(double t0, double t1, double from, double to) {
  if (!(t1 > t0)) return Schedule{{t0}, {to}};
  return Schedule{{t0, t1}, {from, to}};
}

double Schedule::value(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
  const double w = (t - times[i]) / (times[i + 1] - times[i]);
  return values[i] + w * (values[i + 1] - values[i]);
}

double Schedule::rate(double t) const {
  if (t <= times.front() || t > times.back()) return 0.0;
  // First knot strictly at or after t closes the segment (left derivative).
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(std::distance(times.begin(), it));
  return (values[i] - values[i - 1]) / (times[i] - times[i - 1]);
}

void Schedule::validate(const std::string& what) const {
  if (times.empty() || times.size() != values.size()) {
    throw InvalidInput(what + ": schedule needs matching, non-empty knot lists");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i])) {
      throw InvalidInput(what + ": schedule knots must be finite");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InvalidInput(what + ": schedule times must increase");
    }
  }
}

void PointerModelConfig::validate() const {
  units.validate();
  if (!(system_sigma > 0.0) || !std::isfinite(system_sigma)) {
    throw InvalidInput("pointer model: system sigma must be positive");
  }
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw InvalidInput("pointer model: total time must be positive");
  }
  for (const auto& block : blocks) {
    if (!(block.sigma > 0.0)) throw InvalidInput("pointer model: block '" + block.name + "' sigma must be positive");
    block.displacement.validate("block '" + block.name + "'");
    if (block.displacement.value(0.0) != 0.0) {
      throw InvalidInput("pointer model: block '" + block.name + "' displacement must vanish at t = 0");
    }
  }
  if (branches[0].label == branches[1].label || !resolved(branches[0].label) ||
      !resolved(branches[1].label)) {
    throw InvalidInput("pointer model: branches must be labelled + and -");
  }
  double total = 0.0;
  for (const auto& b : branches) {
    if (b.apparatus_sign != 1 && b.apparatus_sign != -1) {
      throw InvalidInput("pointer model: apparatus sign must be +1 or -1");
    }
    b.system_center.validate("system centre");
    total += std::norm(b.amplitude);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidInput("pointer model: |c+|^2 + |c-|^2 must equal 1");
  }
}

PointerModel::PointerModel(PointerModelConfig config) : config_(std::move(config)) {
  config_.validate();
  offsets_.push_back(0);
  for (const auto& block : config_.blocks) offsets_.push_back(offsets_.back() + block.count);
}

namespace {

// sigma(t) and sigma'(t)/sigma(t) of a free Gaussian of initial width s0.
std::pair<double, double> spread(double s0, double t, const Units& u, bool on) {
  if (!on) return {s0, 0.0};
  const double tau = u.hbar / (2.0 * u.mass * s0 * s0);
  const double g = tau * t;
  return {s0 * std::sqrt(1.0 + g * g), tau * g / (1.0 + g * g)};
}

}  // namespace

double PointerModel::system_sigma(double t) const {
  return spread(config_.system_sigma, t, config_.units, config_.spreading).first;
}

double PointerModel::block_sigma(std::size_t k, double t) const {
  return spread(config_.blocks[k].sigma, t, config_.units, config_.spreading).first;
}

PointerModel::Factor PointerModel::system_factor(std::size_t b, double t) const {
  const auto& s = config_.branches[b].system_center;
  const auto [sigma, r] = spread(config_.system_sigma, t, config_.units, config_.spreading);
  return {s.value(t), sigma, s.rate(t), r};
}

PointerModel::Factor PointerModel::block_factor(std::size_t b, std::size_t k, double t) const {
  const auto& block = config_.blocks[k];
  const double eps = config_.branches[b].apparatus_sign;
  const auto [sigma, r] = spread(block.sigma, t, config_.units, config_.spreading);
  return {eps * block.displacement.value(t), sigma, eps * block.displacement.rate(t), r};
}

std::array<double, 2> PointerModel::log_weights(const ConfigPoint& p, double t) const {
  if (p.y.size() != apparatus_size()) throw InvalidInput("pointer model: wrong number of apparatus coordinates");
  std::array<double, 2> out{};
  for (std::size_t b = 0; b < 2; ++b) {
    const double c2 = std::norm(config_.branches[b].amplitude);
    if (c2 == 0.0) {
      out[b] = kNegInf;
      continue;
    }
    const Factor f = system_factor(b, t);
    double lw = std::log(c2) + log_gauss_density(p.x, f.center, f.sigma);
    for (std::size_t k = 0; k < block_count(); ++k) {
      const Factor g = block_factor(b, k, t);
      for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j) {
        lw += log_gauss_density(p.y[j], g.center, g.sigma);
      }
    }
    out[b] = lw;
  }
  return out;
}

std::array<double, 2> PointerModel::branch_local_weight(const ConfigPoint& p, double t) const {
  const auto lw = log_weights(p, t);
  return {std::exp(lw[0]), std::exp(lw[1])};
}

PointerVelocity PointerModel::velocity(const ConfigPoint& p, double t) const {
  return config_.form == VelocityForm::internal_state ? internal_velocity(p, t)
                                                      : coherent_velocity(p, t);
}

PointerVelocity PointerModel::internal_velocity(const ConfigPoint& p, double t) const {
  const auto lw = log_weights(p, t);
  PointerVelocity out;
  out.velocity.y.assign(p.y.size(), 0.0);
  const double top = std::max(lw[0], lw[1]);
  if (!(top >= kLogFloor)) {
    out.regularized = true;
    return out;
  }
  std::array<double, 2> share{};
  for (std::size_t b = 0; b < 2; ++b) share[b] = std::exp(lw[b] - top);
  const double total = share[0] + share[1];
  for (auto& s : share) s /= total;

  for (std::size_t b = 0; b < 2; ++b) {
    if (share[b] == 0.0) continue;
    const Factor f = system_factor(b, t);
    out.velocity.x += share[b] * (f.center_rate + f.sigma_rate * (p.x - f.center));
    for (std::size_t k = 0; k < block_count(); ++k) {
      const Factor g = block_factor(b, k, t);
      for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j) {
        out.velocity.y[j] += share[b] * (g.center_rate + g.sigma_rate * (p.y[j] - g.center));
      }
    }
  }
  return out;
}

PointerVelocity PointerModel::coherent_velocity(const ConfigPoint& p, double t) const {
  if (p.y.size() != apparatus_size()) throw InvalidInput("pointer model: wrong number of apparatus coordinates");
  const double m_over_hbar = 1.0 / config_.units.hbar_over_mass();
  auto factor_log = [&](const Factor& f, double q) {
    const double u = q - f.center;
    return Complex(-u * u / (4 * f.sigma * f.sigma) - 0.25 * std::log(2 * std::numbers::pi * f.sigma * f.sigma),
                   m_over_hbar * (f.center_rate * u + 0.5 * f.sigma_rate * u * u));
  };
  auto factor_dlog = [&](const Factor& f, double q) {
    const double u = q - f.center;
    return Complex(-u / (2 * f.sigma * f.sigma), m_over_hbar * (f.center_rate + f.sigma_rate * u));
  };

  std::array<Complex, 2> ell{};
  std::array<bool, 2> present{};
  for (std::size_t b = 0; b < 2; ++b) {
    const Complex c = config_.branches[b].amplitude;
    present[b] = std::abs(c) > 0.0;
    if (!present[b]) continue;
    Complex l = std::log(c) + factor_log(system_factor(b, t), p.x);
    for (std::size_t k = 0; k < block_count(); ++k) {
      const Factor g = block_factor(b, k, t);
      for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j) l += factor_log(g, p.y[j]);
    }
    ell[b] = l;
  }
  double top = kNegInf;
  for (std::size_t b = 0; b < 2; ++b) {
    if (present[b]) top = std::max(top, ell[b].real());
  }
  PointerVelocity out;
  out.velocity.y.assign(p.y.size(), 0.0);
  std::array<Complex, 2> z{};
  double scale = 0.0;
  for (std::size_t b = 0; b < 2; ++b) {
    if (!present[b]) continue;
    z[b] = std::exp(ell[b] - top);
    scale += std::norm(z[b]);
  }
  const Complex sum = z[0] + z[1];
  if (!(2.0 * top >= kLogFloor) || std::norm(sum) < guidance::kNodeThreshold * scale) {
    out.regularized = true;
    return out;
  }
  auto coordinate_velocity = [&](auto&& dlog) {
    if (present[0] != present[1]) return config_.units.hbar_over_mass() * std::imag(dlog(present[0] ? 0 : 1));
    Complex num{};
    for (std::size_t b = 0; b < 2; ++b) {
      if (present[b]) num += z[b] * dlog(b);
    }
    return config_.units.hbar_over_mass() * std::imag(num / sum);
  };
  out.velocity.x = coordinate_velocity([&](std::size_t b) { return factor_dlog(system_factor(b, t), p.x); });
  for (std::size_t k = 0; k < block_count(); ++k) {
    const std::array<Factor, 2> g = {block_factor(0, k, t), block_factor(1, k, t)};
    for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j) {
      out.velocity.y[j] = coordinate_velocity([&](std::size_t b) { return factor_dlog(g[b], p.y[j]); });
    }
  }
  return out;
}

double log_factor_overlap(double c1, double s1, double v1, double r1, double c2, double s2,
                          double v2, double r2, const Units& units) {
  // f_j = N_j exp(-A_j (q - c_j)^2 + i kappa_j (q - c_j)).
  const double m_over_hbar = units.mass / units.hbar;
  const Complex a1(1.0 / (4 * s1 * s1), -0.5 * m_over_hbar * r1);
  const Complex a2(1.0 / (4 * s2 * s2), -0.5 * m_over_hbar * r2);
  const double k1 = m_over_hbar * v1, k2 = m_over_hbar * v2;
  const Complex i(0.0, 1.0);
  const Complex p = std::conj(a1) + a2;
  const Complex q = 2.0 * std::conj(a1) * c1 + 2.0 * a2 * c2 - i * k1 + i * k2;
  const Complex r = -std::conj(a1) * c1 * c1 - a2 * c2 * c2 + i * k1 * c1 - i * k2 * c2;
  const double log_norms = -0.25 * std::log(2 * std::numbers::pi * s1 * s1) -
                           0.25 * std::log(2 * std::numbers::pi * s2 * s2);
  return log_norms + 0.5 * std::log(std::numbers::pi / std::abs(p)) + std::real(q * q / (4.0 * p) + r);
}

double PointerModel::system_overlap(double t) const {
  const Factor a = system_factor(0, t), b = system_factor(1, t);
  const double l = log_factor_overlap(a.center, a.sigma, a.center_rate, a.sigma_rate, b.center,
                                      b.sigma, b.center_rate, b.sigma_rate, config_.units);
  return std::min(1.0, std::exp(l));
}

double PointerModel::log_omega(double t, std::size_t block) const {
  const Factor a = block_factor(0, block, t), b = block_factor(1, block, t);
  const double l = log_factor_overlap(a.center, a.sigma, a.center_rate, a.sigma_rate, b.center,
                                      b.sigma, b.center_rate, b.sigma_rate, config_.units);
  return std::min(0.0, l);
}

double PointerModel::log_apparatus_overlap(double t, std::size_t block) const {
  return static_cast<double>(config_.blocks[block].count) * log_omega(t, block);
}

double PointerModel::apparatus_overlap(double t, std::size_t block) const {
  return std::exp(log_apparatus_overlap(t, block));
}

Outcome PointerModel::classify(const ConfigPoint& p, double t, double ratio_threshold) const {
  const auto lw = log_weights(p, t);
  const std::size_t top = lw[0] >= lw[1] ? 0 : 1;
  const double gap = lw[top] - lw[1 - top];
  if (!(gap >= std::log(ratio_threshold))) return Outcome::unresolved;
  return config_.branches[top].label;
}

Outcome PointerModel::predict_system(double x0) const {
  const auto& s0 = config_.branches[0].system_center;
  const auto& s1 = config_.branches[1].system_center;
  const double mid = 0.5 * (s0.value(0.0) + s1.value(0.0));
  double direction = s0.value(config_.total_time) - s1.value(config_.total_time);
  if (direction == 0.0) direction = s0.value(0.0) - s1.value(0.0);
  // Centres never part: fall back to the apparatus sign convention.
  if (direction == 0.0) direction = config_.branches[0].apparatus_sign - config_.branches[1].apparatus_sign;
  const double side = (x0 - mid) * direction;
  if (side == 0.0) return Outcome::unresolved;
  return side > 0.0 ? config_.branches[0].label : config_.branches[1].label;
}

Outcome PointerModel::predict_block(const ConfigPoint& p0, std::size_t block) const {
  if (p0.y.size() != apparatus_size()) throw InvalidInput("pointer model: wrong number of apparatus coordinates");
  double sum = 0.0;
  for (std::size_t j = offsets_[block]; j < offsets_[block + 1]; ++j) sum += p0.y[j];
  const double direction = block_factor(0, block, config_.total_time).center -
                           block_factor(1, block, config_.total_time).center;
  const double side = sum * direction;
  if (side == 0.0) return Outcome::unresolved;
  return side > 0.0 ? config_.branches[0].label : config_.branches[1].label;
}

double PointerModel::system_marginal_cdf(double x, double t) const {
  double cdf = 0.0;
  for (std::size_t b = 0; b < 2; ++b) {
    const Factor f = system_factor(b, t);
    cdf += std::norm(config_.branches[b].amplitude) * 0.5 *
           std::erfc(-(x - f.center) / (f.sigma * std::numbers::sqrt2));
  }
  return cdf;
}

std::vector<ConfigPoint> PointerModel::sample(std::size_t n, std::uint64_t seed) const {
  if (n == 0) throw InvalidInput("pointer model: sample size must be at least 1");
  const double p_first = std::norm(config_.branches[0].amplitude);
  std::vector<ConfigPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = guidance::stream_rng(seed, i);
    const std::size_t b = guidance::uniform01(rng) < p_first ? 0 : 1;
    std::normal_distribution<double> normal;
    const Factor f = system_factor(b, 0.0);
    out[i].x = f.center + f.sigma * normal(rng);
    out[i].y.resize(apparatus_size());
    for (std::size_t k = 0; k < block_count(); ++k) {
      const Factor g = block_factor(b, k, 0.0);
      for (std::size_t j = offsets_[k]; j < offsets_[k + 1]; ++j) out[i].y[j] = g.center + g.sigma * normal(rng);
    }
  }
  return out;
}

namespace {

void axpy(ConfigPoint& out, const ConfigPoint& base, double h, const ConfigPoint& v) {
  out.x = base.x + h * v.x;
  out.y.resize(base.y.size());
  for (std::size_t j = 0; j < base.y.size(); ++j) out.y[j] = base.y[j] + h * v.y[j];
}

}  // namespace

std::vector<PointerRun> integrate_pointer(const PointerModel& model,
                                          std::span<const ConfigPoint> initial,
                                          const PointerIntegration& options) {
  const double total = model.config().total_time;
  if (!(options.dt > 0.0)) throw InvalidInput("pointer integration: dt must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(total / options.dt));
  if (steps == 0 || std::abs(static_cast<double>(steps) * options.dt - total) > 1e-9 * total) {
    throw InvalidInput("pointer integration: dt must divide the total time");
  }
  if (!(options.ratio_threshold > 1.0)) throw InvalidInput("pointer integration: ratio threshold must exceed 1");
  const std::size_t blocks = model.block_count();
  const std::size_t dims = 1 + blocks;

  std::vector<PointerRun> runs(initial.size());
  parallel_for(
      initial.size(),
      [&](std::size_t begin, std::size_t end) {
        ConfigPoint probe, last_velocity;
        for (std::size_t i = begin; i < end; ++i) {
          PointerRun& run = runs[i];
          if (initial[i].y.size() != model.apparatus_size()) {
            throw InvalidInput("pointer integration: wrong number of apparatus coordinates");
          }
          run.initial = initial[i];
          run.path.dims = dims;
          run.path.times.reserve(steps + 1);
          run.path.points.reserve((steps + 1) * dims);
          last_velocity.x = 0.0;
          last_velocity.y.assign(model.apparatus_size(), 0.0);

          auto record = [&](double t, const ConfigPoint& p) {
            run.path.times.push_back(t);
            run.path.points.push_back(p.x);
            for (std::size_t k = 0; k < blocks; ++k) {
              double sum = 0.0;
              for (std::size_t j = model.block_offset(k); j < model.block_offset(k + 1); ++j) sum += p.y[j];
              run.path.points.push_back(sum);
            }
            if (options.record_full) run.full.push_back(p);
          };
          auto velocity = [&](const ConfigPoint& p, double t) {
            PointerVelocity v = model.velocity(p, t);
            if (v.regularized) {
              ++run.path.regularization_events;
              return last_velocity;
            }
            last_velocity = v.velocity;
            return v.velocity;
          };

          ConfigPoint x = initial[i];
          record(0.0, x);
          for (std::size_t s = 0; s < steps; ++s) {
            const double t = static_cast<double>(s) * options.dt;
            const double t_next = s + 1 == steps ? total : static_cast<double>(s + 1) * options.dt;
            const double h = t_next - t;
            const ConfigPoint k1 = velocity(x, t);
            axpy(probe, x, 0.5 * h, k1);
            const ConfigPoint k2 = velocity(probe, t + 0.5 * h);
            axpy(probe, x, 0.5 * h, k2);
            const ConfigPoint k3 = velocity(probe, t + 0.5 * h);
            axpy(probe, x, h, k3);
            const ConfigPoint k4 = velocity(probe, t_next);
            x.x += h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
            for (std::size_t j = 0; j < x.y.size(); ++j) {
              x.y[j] += h / 6.0 * (k1.y[j] + 2.0 * k2.y[j] + 2.0 * k3.y[j] + k4.y[j]);
            }
            if (!std::isfinite(x.x)) throw NumericalFailure("pointer integration: non-finite position");
            record(t_next, x);
          }
          run.final = x;
          run.outcome = model.classify(x, total, options.ratio_threshold);
          run.path.outcome = run.outcome;
        }
      },
      options.threads);
  return runs;
}

std::vector<OverlapSample> overlap_series(const PointerModel& model, std::size_t samples) {
  samples = std::max<std::size_t>(samples, 1);
  std::vector<OverlapSample> out;
  out.reserve(samples + 1);
  for (std::size_t i = 0; i <= samples; ++i) {
    const double t = model.config().total_time * static_cast<double>(i) / static_cast<double>(samples);
    OverlapSample s;
    s.t = t;
    s.system = model.system_overlap(t);
    for (std::size_t k = 0; k < model.block_count(); ++k) {
      s.blocks.push_back(model.apparatus_overlap(t, k));
      s.log_blocks.push_back(model.log_apparatus_overlap(t, k));
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace bohmctx::pointer
