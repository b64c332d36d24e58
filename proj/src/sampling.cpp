#include "bohmctx/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "bohmctx/errors.hpp"

namespace bohmctx::guidance {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

GridCdf::GridCdf(std::span<const double> density, const Grid& grid, int axis)
    : lower_(grid.axis(axis).lower - 0.5 * grid.axis(axis).spacing()),
      spacing_(grid.axis(axis).spacing()) {
  std::vector<double> mass(grid.axis(axis).points, 0.0);
  if (grid.dims() == 1) {
    std::copy(density.begin(), density.end(), mass.begin());
  } else {
    const std::size_t n1 = grid.axis(1).points;
    for (std::size_t i = 0; i < density.size(); ++i) {
      mass[axis == 0 ? i / n1 : i % n1] += density[i];
    }
  }
  build(mass);
}

GridCdf::GridCdf(std::span<const double> cell_mass, double lower, double spacing)
    : lower_(lower), spacing_(spacing) {
  build(cell_mass);
}

void GridCdf::build(std::span<const double> mass) {
  cumulative_.assign(mass.size() + 1, 0.0);
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (!(mass[i] >= 0.0)) throw InvalidInput("cdf: negative or NaN density");
    cumulative_[i + 1] = cumulative_[i] + mass[i];
  }
  const double total = cumulative_.back();
  if (!(total > 0.0)) throw InvalidInput("cdf: density has no mass");
  for (auto& c : cumulative_) c /= total;
}

double GridCdf::cdf(double x) const {
  const double u = (x - lower_) / spacing_;
  if (u <= 0.0) return 0.0;
  const auto cells = cumulative_.size() - 1;
  if (u >= static_cast<double>(cells)) return 1.0;
  const auto i = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(i);
  return cumulative_[i] + w * (cumulative_[i + 1] - cumulative_[i]);
}

double GridCdf::quantile(double u) const {
  const auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), u);
  auto i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  i = std::min(i, cumulative_.size() - 2);
  const double width = cumulative_[i + 1] - cumulative_[i];
  const double frac = width > 0.0 ? (u - cumulative_[i]) / width : 0.5;
  return lower_ + spacing_ * (static_cast<double>(i) + std::clamp(frac, 0.0, 1.0));
}

EquilibriumSample sample_density(std::span<const double> density, const Grid& grid, std::size_t n,
                                 std::uint64_t seed) {
  if (n == 0) throw InvalidInput("sample_equilibrium: n must be at least 1");
  EquilibriumSample out;
  out.seed = seed;
  out.positions.reserve(n);
  // Cells are centred on the nodes; the half cell below the first node wraps
  // around the periodic domain.
  auto wrap = [&](double x, int axis) {
    const auto& ax = grid.axis(axis);
    return x < ax.lower ? x + ax.length() : x;
  };
  if (grid.dims() == 1) {
    out.method = "inverse-cdf-1d";
    const GridCdf cdf(density, grid, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto rng = stream_rng(seed, i);
      out.positions.push_back({wrap(cdf.quantile(uniform01(rng)), 0), 0.0});
    }
    return out;
  }
  out.method = "marginal-conditional-2d";
  const std::size_t n0 = grid.axis(0).points;
  const std::size_t n1 = grid.axis(1).points;
  const GridCdf marginal(density, grid, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream_rng(seed, i);
    const double y = marginal.quantile(uniform01(rng));
    auto row = static_cast<std::size_t>(
        std::max(0.0, std::round((y - grid.axis(0).lower) / grid.axis(0).spacing())));
    row = std::min(row, n0 - 1);
    const double dz = grid.axis(1).spacing();
    const GridCdf conditional(density.subspan(row * n1, n1), grid.axis(1).lower - 0.5 * dz, dz);
    out.positions.push_back({wrap(y, 0), wrap(conditional.quantile(uniform01(rng)), 1)});
  }
  return out;
}

namespace {

void require_normalized(double norm) {
  if (std::abs(norm - 1.0) > 1e-6) {
    throw InvalidInput("sample_equilibrium: source is not normalized (norm = " +
                       std::to_string(norm) + ")");
  }
}

}  // namespace

EquilibriumSample sample_equilibrium(const numerics::Field& source, std::size_t n, std::uint64_t seed) {
  require_normalized(numerics::norm(source));
  const auto rho = numerics::density(source);
  return sample_density(rho, source.grid(), n, seed);
}

EquilibriumSample sample_equilibrium(const numerics::Spinor& source, std::size_t n, std::uint64_t seed) {
  require_normalized(numerics::norm(source));
  const auto rho = numerics::density(source);
  return sample_density(rho, source.grid(), n, seed);
}

}  // namespace bohmctx::guidance
