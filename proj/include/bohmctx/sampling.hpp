#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bohmctx/field.hpp"

namespace bohmctx::guidance {

using numerics::Coord;
using numerics::Grid;

/// Independent, reproducible stream for item `index` of a run seeded with
/// `seed`. Results never depend on which thread draws them.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index);

/// Uniform double in [0, 1) from the top 53 bits of one draw.
double uniform01(std::mt19937_64& rng);

/// CDF of a grid density along one axis. Each node's density is spread
/// uniformly over the cell [x_i - dx/2, x_i + dx/2), so the CDF is piecewise linear.
class GridCdf {
 public:
  GridCdf(std::span<const double> density, const Grid& grid, int axis);
  GridCdf(std::span<const double> cell_mass, double lower, double spacing);

  double cdf(double x) const;
  double quantile(double u) const;
  double median() const { return quantile(0.5); }

 private:
  void build(std::span<const double> mass);
  double lower_;
  double spacing_;
  std::vector<double> cumulative_;  // size cells + 1, normalized to 1
};

struct EquilibriumSample {
  std::vector<Coord> positions;
  std::uint64_t seed = 0;
  std::string method;
};

/// Draws n positions from rho = |psi|^2. 1D: inverse CDF with linear
/// interpolation inside the cell; 2D: axis-0 marginal, then the axis-1
/// conditional in the chosen row. Position i uses stream_rng(seed, i).
/// The source must be normalized to within 1e-6.
EquilibriumSample sample_equilibrium(const numerics::Field& source, std::size_t n, std::uint64_t seed);
EquilibriumSample sample_equilibrium(const numerics::Spinor& source, std::size_t n, std::uint64_t seed);
EquilibriumSample sample_density(std::span<const double> density, const Grid& grid, std::size_t n,
                                 std::uint64_t seed);

}  // namespace bohmctx::guidance
