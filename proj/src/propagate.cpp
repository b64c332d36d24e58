#include "bohmctx/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bohmctx/errors.hpp"

namespace bohmctx::numerics {

namespace {

constexpr std::size_t kGuardCells = 10;

std::vector<double> potential_values(const Grid& grid, const Potential& potential, int sign,
                                     const Units& units) {
  std::vector<double> v(grid.size(), 0.0);
  if (const auto* lin = std::get_if<LinearSpinPotential>(&potential)) {
    const int axis = grid.gradient_axis();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double z = grid.coordinate(i)[static_cast<std::size_t>(axis)];
      v[i] = -sign * 0.5 * units.hbar * (lin->offset + lin->gradient * z);
    }
  } else if (const auto* sampled = std::get_if<SampledPotential>(&potential)) {
    if (sampled->values.size() != grid.size()) {
      throw InvalidInput("sampled potential: size does not match grid");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(sampled->values[i])) throw InvalidInput("sampled potential: non-finite value");
      v[i] = sampled->values[i];
    }
  }
  return v;
}

std::vector<Complex> half_phase(const std::vector<double>& v, double dt, const Units& units) {
  std::vector<Complex> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::polar(1.0, -v[i] * dt / (2.0 * units.hbar));
  return out;
}

void multiply_phase(std::span<Complex> data, const std::vector<Complex>& phase) {
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= phase[i];
}

bool is_free(const Potential& p) { return std::holds_alternative<FreePotential>(p); }

template <class State>
Propagation<State> run(const State& initial, const Potential& potential, double dt,
                       std::size_t n_steps, const Units& units,
                       const PropagationOptions& options) {
  units.validate();
  if (!(dt != 0.0) || !std::isfinite(dt)) throw InvalidInput("propagate: dt must be finite and non-zero");
  constexpr bool spinor = std::is_same_v<State, Spinor>;
  if (!initial.all_finite()) throw PropagationFailure("propagate: non-finite input field", 0);

  Propagation<State> result{initial, {}, {}};
  const bool frames_on = options.frame_stride > 0;
  auto store = [&](std::size_t step) {
    if (options.support_guard) check_support(result.final_state, static_cast<double>(step) * dt);
    if (frames_on) {
      result.frame_times.push_back(static_cast<double>(step) * dt);
      result.frames.push_back(result.final_state);
    }
  };
  store(0);
  if (n_steps == 0) return result;

  SplitStepper stepper(initial.grid(), potential, spinor, dt, units);
  for (std::size_t s = 1; s <= n_steps; ++s) {
    stepper.step(result.final_state);
    if (!result.final_state.all_finite()) {
      throw PropagationFailure("propagate: NaN/Inf in field", s);
    }
    const bool at_stride = frames_on && s % options.frame_stride == 0;
    if (at_stride || s == n_steps) {
      store(s);
    }
  }
  return result;
}

}  // namespace

SplitStepper::SplitStepper(const Grid& grid, const Potential& potential, bool spinor,
                           double dt, const Units& units)
    : grid_(grid), dt_(dt), fft_(grid) {
  units.validate();
  if (std::holds_alternative<LinearSpinPotential>(potential) && !spinor) {
    throw InvalidInput("linear spin-dependent potential requires a spinor field");
  }
  kinetic_phase_.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double k2 = 0.0;
    if (grid.dims() == 1) {
      const double k = grid.axis(0).wavenumber(i);
      k2 = k * k;
    } else {
      const std::size_t n1 = grid.axis(1).points;
      const double k0 = grid.axis(0).wavenumber(i / n1);
      const double k1 = grid.axis(1).wavenumber(i % n1);
      k2 = k0 * k0 + k1 * k1;
    }
    kinetic_phase_[i] = std::polar(1.0, -units.hbar * k2 * dt / (2.0 * units.mass));
  }
  if (!is_free(potential)) {
    half_potential_up_ = half_phase(potential_values(grid, potential, +1, units), dt, units);
    if (spinor) {
      half_potential_down_ = half_phase(potential_values(grid, potential, -1, units), dt, units);
    }
  }
}

void SplitStepper::kinetic(std::span<Complex> data) {
  fft_.forward(data);
  multiply_phase(data, kinetic_phase_);
  fft_.backward(data);
}

void SplitStepper::step(Field& f) {
  if (!(f.grid() == grid_)) throw InvalidInput("stepper: field on a different grid");
  auto data = f.values();
  if (!half_potential_up_.empty()) multiply_phase(data, half_potential_up_);
  kinetic(data);
  if (!half_potential_up_.empty()) multiply_phase(data, half_potential_up_);
}

void SplitStepper::step(Spinor& s) {
  if (!(s.grid() == grid_)) throw InvalidInput("stepper: spinor on a different grid");
  if (half_potential_up_.empty()) {
    kinetic(s.up.values());
    kinetic(s.down.values());
    return;
  }
  const auto& down_phase = half_potential_down_.empty() ? half_potential_up_ : half_potential_down_;
  auto up = s.up.values();
  multiply_phase(up, half_potential_up_);
  kinetic(up);
  multiply_phase(up, half_potential_up_);
  auto down = s.down.values();
  multiply_phase(down, down_phase);
  kinetic(down);
  multiply_phase(down, down_phase);
}

Propagation<Field> propagate(const Field& initial, const Potential& potential, double dt,
                             std::size_t n_steps, const Units& units,
                             const PropagationOptions& options) {
  return run(initial, potential, dt, n_steps, units, options);
}

Propagation<Spinor> propagate(const Spinor& initial, const Potential& potential, double dt,
                              std::size_t n_steps, const Units& units,
                              const PropagationOptions& options) {
  return run(initial, potential, dt, n_steps, units, options);
}

bool support_ok(std::span<const double> rho, const Grid& grid, double threshold) {
  const double peak = *std::max_element(rho.begin(), rho.end());
  if (!(peak > 0.0)) return true;
  const double limit = threshold * peak;
  auto near_edge = [&](std::size_t i, std::size_t n) {
    return i < kGuardCells || i + kGuardCells >= n;
  };
  for (std::size_t i = 0; i < rho.size(); ++i) {
    bool edge = false;
    if (grid.dims() == 1) {
      edge = near_edge(i, grid.axis(0).points);
    } else {
      const std::size_t n1 = grid.axis(1).points;
      edge = near_edge(i / n1, grid.axis(0).points) || near_edge(i % n1, n1);
    }
    if (edge && rho[i] > limit) return false;
  }
  return true;
}

void check_support(const Field& f, double t) {
  if (!support_ok(density(f), f.grid())) {
    throw SupportGuardViolation("support guard: density reached the domain edge at t = " +
                                std::to_string(t));
  }
}

void check_support(const Spinor& s, double t) {
  if (!support_ok(density(s), s.grid())) {
    throw SupportGuardViolation("support guard: density reached the domain edge at t = " +
                                std::to_string(t));
  }
}

}  // namespace bohmctx::numerics
