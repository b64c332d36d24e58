#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace bohmctx::numerics {

/// Action and mass scales. Everything defaults to natural units.
struct Units {
  double hbar = 1.0;
  double mass = 1.0;

  void validate() const;
  double hbar_over_mass() const { return hbar / mass; }
};

/// Position in the simulated plane. 1D grids only use component 0; on 2D
/// grids component 0 is y and component 1 is z.
using Coord = std::array<double, 2>;

/// One periodic axis. The point at `upper` is the image of `lower` and is not
/// stored.
struct Axis {
  std::size_t points = 0;
  double lower = 0.0;
  double upper = 0.0;

  double spacing() const { return (upper - lower) / static_cast<double>(points); }
  double length() const { return upper - lower; }
  double coordinate(std::size_t i) const {
    return lower + static_cast<double>(i) * spacing();
  }
  /// Angular wavenumber of FFT bin `i` in standard (unshifted) order.
  double wavenumber(std::size_t i) const;

  bool operator==(const Axis&) const = default;
};

class Grid {
 public:
  static constexpr std::size_t kMinPoints = 64;

  explicit Grid(Axis axis);
  Grid(Axis axis0, Axis axis1);

  int dims() const { return dims_; }
  const Axis& axis(int i) const { return axes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const;
  double cell_volume() const;

  /// Row-major flattening; axis 1 is contiguous.
  std::size_t index(std::size_t i0, std::size_t i1 = 0) const {
    return dims_ == 1 ? i0 : i0 * axes_[1].points + i1;
  }

  bool contains(const Coord& x) const;
  Coord coordinate(std::size_t flat) const;

  /// Axis along which the spin-dependent field gradient acts (z).
  int gradient_axis() const { return dims_ - 1; }

  bool operator==(const Grid& other) const;

 private:
  int dims_;
  std::array<Axis, 2> axes_{};
};

}  // namespace bohmctx::numerics
