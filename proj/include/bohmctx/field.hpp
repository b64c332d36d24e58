#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "bohmctx/grid.hpp"

namespace bohmctx::numerics {

using Complex = std::complex<double>;

/// Complex amplitude sampled on a grid, in units of length^(-dims/2).
class Field {
 public:
  explicit Field(Grid grid);
  Field(Grid grid, std::vector<Complex> values);

  const Grid& grid() const { return grid_; }
  std::span<const Complex> values() const { return values_; }
  std::span<Complex> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  const Complex& operator[](std::size_t i) const { return values_[i]; }
  Complex& operator[](std::size_t i) { return values_[i]; }

  Field& operator*=(Complex factor);
  Field& operator+=(const Field& other);

  bool all_finite() const;

 private:
  Grid grid_;
  std::vector<Complex> values_;
};

inline Field operator*(Field f, Complex factor) { return f *= factor; }
inline Field operator+(Field a, const Field& b) { return a += b; }

/// Two-component field; components are along the quantization axis z.
struct Spinor {
  Field up;
  Field down;

  Spinor(Field up_component, Field down_component);
  const Grid& grid() const { return up.grid(); }
  bool all_finite() const { return up.all_finite() && down.all_finite(); }
};

/// sqrt(sum |psi|^2 dV). Note this is the L2 norm, not its square.
double norm(const Field& f);
double norm(const Spinor& s);

/// <a|b> = sum conj(a) b dV. Throws InvalidInput on mismatched grids.
Complex overlap(const Field& a, const Field& b);
Complex overlap(const Spinor& a, const Spinor& b);

/// Integral of |a| |b| over the grid. Small only when the supports are
/// (numerically) disjoint, independent of phases.
double density_overlap(const Field& a, const Field& b);

Field normalized(Field f);

/// Density |psi|^2 on the grid nodes (sum over components for spinors).
std::vector<double> density(const Field& f);
std::vector<double> density(const Spinor& s);

/// First and second moments of |psi|^2 along each axis, per unit norm.
struct Moments {
  Coord mean{};
  Coord variance{};
};
Moments moments(std::span<const double> density, const Grid& grid);
Moments moments(const Field& f);

/// Plain-text dump: one line per grid point with the coordinates followed by
/// the real and imaginary parts. Intended for debugging only.
void write_text(std::ostream& out, const Field& f);
Field read_text(std::istream& in, const Grid& grid);

}  // namespace bohmctx::numerics
