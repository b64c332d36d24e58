#include "bohmctx/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "bohmctx/errors.hpp"

namespace bohmctx::guidance {

namespace {

void add_current(std::vector<double>& current, const Field& f, const Field& df, double scale) {
  for (std::size_t i = 0; i < current.size(); ++i) {
    current[i] += scale * std::imag(std::conj(f[i]) * df[i]);
  }
}

}  // namespace

GuidanceFrame GuidanceFrame::from_field(const Field& f, const Units& units) {
  numerics::Fft fft(f.grid());
  return from_field(f, units, fft);
}

GuidanceFrame GuidanceFrame::from_field(const Field& f, const Units& units, numerics::Fft& fft) {
  units.validate();
  GuidanceFrame frame(f.grid(), VelocityModel::scalar_guidance);
  frame.density_ = numerics::density(f);
  for (int d = 0; d < f.grid().dims(); ++d) {
    auto& j = frame.current_[static_cast<std::size_t>(d)];
    j.assign(f.size(), 0.0);
    add_current(j, f, numerics::spectral_derivative(f, d, fft), units.hbar_over_mass());
  }
  frame.finish();
  return frame;
}

GuidanceFrame GuidanceFrame::from_spinor(const Spinor& s, const Units& units, VelocityModel model) {
  numerics::Fft fft(s.grid());
  return from_spinor(s, units, model, fft);
}

GuidanceFrame GuidanceFrame::from_spinor(const Spinor& s, const Units& units, VelocityModel model,
                                         numerics::Fft& fft) {
  units.validate();
  if (model == VelocityModel::scalar_guidance) {
    throw InvalidInput("guidance: scalar model cannot be built from a spinor");
  }
  const Grid& grid = s.grid();
  const bool gordon = model == VelocityModel::spinor_with_gordon;
  if (gordon && grid.dims() != 2) {
    throw InvalidInput("guidance: the Gordon term needs a 2D (y, z) grid");
  }
  GuidanceFrame frame(grid, model);
  frame.density_ = numerics::density(s);
  const double hm = units.hbar_over_mass();
  std::array<std::vector<double>, 2> dsx;
  for (int d = 0; d < grid.dims(); ++d) {
    const auto k = static_cast<std::size_t>(d);
    const Field dup = numerics::spectral_derivative(s.up, d, fft);
    const Field ddown = numerics::spectral_derivative(s.down, d, fft);
    frame.current_[k].assign(grid.size(), 0.0);
    add_current(frame.current_[k], s.up, dup, hm);
    add_current(frame.current_[k], s.down, ddown, hm);
    if (gordon) {
      dsx[k].resize(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) {
        dsx[k][i] = 2.0 * std::real(std::conj(dup[i]) * s.down[i] + std::conj(s.up[i]) * ddown[i]);
      }
    }
  }
  if (gordon) {
    frame.gordon_[0].resize(grid.size());
    frame.gordon_[1].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      frame.gordon_[0][i] = 0.5 * hm * dsx[1][i];
      frame.gordon_[1][i] = -0.5 * hm * dsx[0][i];
    }
  }
  frame.finish();
  return frame;
}

void GuidanceFrame::finish() {
  peak_ = density_.empty() ? 0.0 : *std::max_element(density_.begin(), density_.end());
}

GuidanceFrame::Stencil GuidanceFrame::stencil(const Coord& x) const {
  if (!grid_.contains(x)) throw InvalidInput("guidance: position outside the grid domain");
  auto locate = [&](int axis, double pos, std::size_t& i0, std::size_t& i1, double& w) {
    const auto& a = grid_.axis(axis);
    const double u = (pos - a.lower) / a.spacing();
    double cell = std::floor(u);
    w = u - cell;
    auto i = static_cast<std::size_t>(cell);
    if (i >= a.points) {  // rounding right at the upper edge
      i = a.points - 1;
      w = 1.0;
    }
    i0 = i;
    i1 = (i + 1) % a.points;
  };
  Stencil s;
  if (grid_.dims() == 1) {
    std::size_t i0 = 0, i1 = 0;
    double w = 0.0;
    locate(0, x[0], i0, i1, w);
    s.index = {i0, i1, 0, 0};
    s.weight = {1.0 - w, w, 0.0, 0.0};
    s.count = 2;
  } else {
    std::size_t a0 = 0, a1 = 0, b0 = 0, b1 = 0;
    double wa = 0.0, wb = 0.0;
    locate(0, x[0], a0, a1, wa);
    locate(1, x[1], b0, b1, wb);
    s.index = {grid_.index(a0, b0), grid_.index(a0, b1), grid_.index(a1, b0), grid_.index(a1, b1)};
    s.weight = {(1.0 - wa) * (1.0 - wb), (1.0 - wa) * wb, wa * (1.0 - wb), wa * wb};
    s.count = 4;
  }
  return s;
}

double GuidanceFrame::interpolate(const std::vector<double>& values, const Stencil& s) const {
  double sum = 0.0;
  for (int k = 0; k < s.count; ++k) {
    sum += s.weight[static_cast<std::size_t>(k)] * values[s.index[static_cast<std::size_t>(k)]];
  }
  return sum;
}

double GuidanceFrame::density(const Coord& x) const { return interpolate(density_, stencil(x)); }

VelocitySample GuidanceFrame::convective_velocity(const Coord& x) const {
  const Stencil s = stencil(x);
  const double rho = interpolate(density_, s);
  VelocitySample out;
  if (!(rho >= kNodeThreshold * peak_) || !(rho > 0.0)) {
    out.regularized = true;
    return out;
  }
  for (int d = 0; d < grid_.dims(); ++d) {
    const auto k = static_cast<std::size_t>(d);
    out.velocity[k] = interpolate(current_[k], s) / rho;
  }
  return out;
}

VelocitySample GuidanceFrame::gordon_velocity(const Coord& x) const {
  const Stencil s = stencil(x);
  VelocitySample out;
  if (!has_gordon()) return out;
  const double rho = interpolate(density_, s);
  if (!(rho >= kNodeThreshold * peak_) || !(rho > 0.0)) {
    out.regularized = true;
    return out;
  }
  out.velocity[0] = interpolate(gordon_[0], s) / rho;
  out.velocity[1] = interpolate(gordon_[1], s) / rho;
  return out;
}

VelocitySample GuidanceFrame::velocity(const Coord& x) const {
  VelocitySample v = convective_velocity(x);
  if (!has_gordon() || v.regularized) return v;
  const VelocitySample g = gordon_velocity(x);
  v.velocity[0] += g.velocity[0];
  v.velocity[1] += g.velocity[1];
  return v;
}

VelocitySample velocity_scalar(const Field& f, const Coord& x, const Units& units) {
  return GuidanceFrame::from_field(f, units).velocity(x);
}

VelocitySample velocity_spinor(const Spinor& s, const Coord& x, const Units& units) {
  return GuidanceFrame::from_spinor(s, units, VelocityModel::spinor_convective).velocity(x);
}

VelocitySample gordon_velocity(const Spinor& s, const Coord& x, const Units& units) {
  if (s.grid().dims() != 2) throw InvalidInput("gordon_velocity: needs a 2D (y, z) grid");
  return GuidanceFrame::from_spinor(s, units, VelocityModel::spinor_with_gordon).gordon_velocity(x);
}

}  // namespace bohmctx::guidance
