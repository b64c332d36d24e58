#pragma once

#include <array>
#include <vector>

#include "bohmctx/field.hpp"
#include "bohmctx/spectral.hpp"

namespace bohmctx::guidance {

using numerics::Coord;
using numerics::Field;
using numerics::Grid;
using numerics::Spinor;
using numerics::Units;

enum class VelocityModel { scalar_guidance, spinor_convective, spinor_with_gordon };

/// Local density below this fraction of the frame's peak density counts as a
/// node: the velocity is not evaluated there.
inline constexpr double kNodeThreshold = 1e-12;

struct VelocitySample {
  Coord velocity{};
  bool regularized = false;
};

/// Density and probability current of one wavefunction frame, differentiated
/// once (spectrally) and then interpolated (linear in 1D, bilinear in 2D).
///
/// The velocity is interp(J)/interp(rho), with J = (hbar/m) Im(Psi^+ grad Psi)
/// summed over components. With the Gordon term enabled the frame also holds
/// G = (hbar/2m) (d_z s_x, -d_y s_x), s_x = 2 Re(conj(up) down), i.e. the
/// in-plane part of curl(Psi^+ sigma Psi) for a (y, z) plane with x out of
/// plane. The out-of-plane component is not represented.
class GuidanceFrame {
 public:
  static GuidanceFrame from_field(const Field& f, const Units& units);
  static GuidanceFrame from_field(const Field& f, const Units& units, numerics::Fft& fft);
  static GuidanceFrame from_spinor(const Spinor& s, const Units& units, VelocityModel model);
  static GuidanceFrame from_spinor(const Spinor& s, const Units& units, VelocityModel model,
                                   numerics::Fft& fft);

  const Grid& grid() const { return grid_; }
  VelocityModel model() const { return model_; }
  double peak_density() const { return peak_; }
  bool has_gordon() const { return !gordon_[0].empty(); }

  /// Full velocity under the frame's model. Throws InvalidInput if x is
  /// outside the grid domain.
  VelocitySample velocity(const Coord& x) const;
  VelocitySample convective_velocity(const Coord& x) const;
  /// Gordon contribution only; zero vector when the frame has no Gordon term.
  VelocitySample gordon_velocity(const Coord& x) const;
  double density(const Coord& x) const;

 private:
  struct Stencil {
    std::array<std::size_t, 4> index{};
    std::array<double, 4> weight{};
    int count = 0;
  };

  GuidanceFrame(const Grid& grid, VelocityModel model) : grid_(grid), model_(model) {}
  Stencil stencil(const Coord& x) const;
  double interpolate(const std::vector<double>& values, const Stencil& s) const;
  void finish();

  Grid grid_;
  VelocityModel model_;
  std::vector<double> density_;
  std::array<std::vector<double>, 2> current_;
  std::array<std::vector<double>, 2> gordon_;
  double peak_ = 0.0;
};

/// v = (hbar/m) Im(grad psi / psi) at x.
VelocitySample velocity_scalar(const Field& f, const Coord& x, const Units& units);
/// v = (hbar/m) Im(Psi^+ grad Psi) / (Psi^+ Psi) at x.
VelocitySample velocity_spinor(const Spinor& s, const Coord& x, const Units& units);
/// In-plane Gordon term at x. Requires a 2D grid.
VelocitySample gordon_velocity(const Spinor& s, const Coord& x, const Units& units);

}  // namespace bohmctx::guidance
