#pragma once

#include <vector>

#include "bohmctx/field.hpp"

namespace bohmctx::numerics {

/// Gaussian wave packet. `sigma` is the standard deviation of |psi|^2 (not of
/// psi), so the amplitude is exp(-(x-c)^2 / (4 sigma^2)). `wavenumber` is the
/// mean k per axis; `phase` is a global phase.
struct GaussianPacket {
  std::vector<double> center;
  std::vector<double> sigma;
  std::vector<double> wavenumber;
  double phase = 0.0;

  /// Packet support must satisfy center +- 5 sigma inside the domain.
  void validate(const Grid& grid) const;
};

/// Builds the packet and renormalizes it on the grid to unit norm.
Field make_gaussian(const Grid& grid, const GaussianPacket& packet);

/// exp(i k . x) on the grid, unnormalized (|psi| = 1).
Field plane_wave(const Grid& grid, const Coord& wavenumber);

/// Closed-form width of a freely spreading Gaussian.
double free_gaussian_width(double sigma0, double t, const Units& units);

}  // namespace bohmctx::numerics
