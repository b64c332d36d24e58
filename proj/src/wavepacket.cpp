#include "bohmctx/wavepacket.hpp"

#include <cmath>
#include <string>

#include "bohmctx/errors.hpp"

namespace bohmctx::numerics {

void GaussianPacket::validate(const Grid& grid) const {
  const auto dims = static_cast<std::size_t>(grid.dims());
  if (center.size() != dims || sigma.size() != dims || wavenumber.size() != dims) {
    throw InvalidInput("gaussian: center/sigma/wavenumber must have one entry per axis");
  }
  for (std::size_t d = 0; d < dims; ++d) {
    const Axis& a = grid.axis(static_cast<int>(d));
    if (!(sigma[d] > 0.0) || !std::isfinite(sigma[d])) {
      throw InvalidInput("gaussian: sigma must be positive");
    }
    if (center[d] - 5.0 * sigma[d] < a.lower || center[d] + 5.0 * sigma[d] > a.upper) {
      throw InvalidInput("gaussian: packet support (center +- 5 sigma) leaves the domain on axis " +
                         std::to_string(d));
    }
  }
}

Field make_gaussian(const Grid& grid, const GaussianPacket& packet) {
  packet.validate(grid);
  Field f(grid);
  const auto dims = static_cast<std::size_t>(grid.dims());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Coord x = grid.coordinate(i);
    double log_mod = 0.0;
    double arg = packet.phase;
    for (std::size_t d = 0; d < dims; ++d) {
      const double u = x[d] - packet.center[d];
      log_mod -= u * u / (4.0 * packet.sigma[d] * packet.sigma[d]);
      arg += packet.wavenumber[d] * u;
    }
    f[i] = std::polar(std::exp(log_mod), arg);
  }
  return normalized(std::move(f));
}

Field plane_wave(const Grid& grid, const Coord& wavenumber) {
  Field f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Coord x = grid.coordinate(i);
    double arg = wavenumber[0] * x[0];
    if (grid.dims() == 2) arg += wavenumber[1] * x[1];
    f[i] = std::polar(1.0, arg);
  }
  return f;
}

double free_gaussian_width(double sigma0, double t, const Units& units) {
  const double r = units.hbar * t / (2.0 * units.mass * sigma0 * sigma0);
  return sigma0 * std::sqrt(1.0 + r * r);
}

}  // namespace bohmctx::numerics
