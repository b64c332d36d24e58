#include "bohmctx/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "bohmctx/errors.hpp"

namespace bohmctx::numerics {

void Units::validate() const {
  if (!(hbar > 0.0) || !(mass > 0.0) || !std::isfinite(hbar) || !std::isfinite(mass)) {
    throw InvalidInput("units: hbar and mass must be finite and strictly positive");
  }
}

double Axis::wavenumber(std::size_t i) const {
  const auto n = static_cast<std::ptrdiff_t>(points);
  auto m = static_cast<std::ptrdiff_t>(i);
  if (m >= n / 2) m -= n;
  return 2.0 * std::numbers::pi * static_cast<double>(m) / length();
}

namespace {

void check_axis(const Axis& a) {
  if (a.points < Grid::kMinPoints) {
    throw InvalidInput("grid: each axis needs at least " +
                       std::to_string(Grid::kMinPoints) + " points");
  }
  if (!(a.upper > a.lower) || !std::isfinite(a.lower) || !std::isfinite(a.upper)) {
    throw InvalidInput("grid: axis upper bound must exceed lower bound");
  }
}

}  // namespace

Grid::Grid(Axis axis) : dims_(1) {
  check_axis(axis);
  axes_[0] = axis;
}

Grid::Grid(Axis axis0, Axis axis1) : dims_(2) {
  check_axis(axis0);
  check_axis(axis1);
  axes_[0] = axis0;
  axes_[1] = axis1;
}

std::size_t Grid::size() const {
  return dims_ == 1 ? axes_[0].points : axes_[0].points * axes_[1].points;
}

double Grid::cell_volume() const {
  return dims_ == 1 ? axes_[0].spacing() : axes_[0].spacing() * axes_[1].spacing();
}

bool Grid::contains(const Coord& x) const {
  for (int d = 0; d < dims_; ++d) {
    const Axis& a = axes_[static_cast<std::size_t>(d)];
    if (!(x[static_cast<std::size_t>(d)] >= a.lower && x[static_cast<std::size_t>(d)] < a.upper)) {
      return false;
    }
  }
  return true;
}

Coord Grid::coordinate(std::size_t flat) const {
  if (dims_ == 1) return {axes_[0].coordinate(flat), 0.0};
  const std::size_t n1 = axes_[1].points;
  return {axes_[0].coordinate(flat / n1), axes_[1].coordinate(flat % n1)};
}

bool Grid::operator==(const Grid& other) const {
  if (dims_ != other.dims_) return false;
  for (int d = 0; d < dims_; ++d) {
    if (!(axes_[static_cast<std::size_t>(d)] == other.axes_[static_cast<std::size_t>(d)])) return false;
  }
  return true;
}

}  // namespace bohmctx::numerics
