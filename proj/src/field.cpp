#include "bohmctx/field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "bohmctx/errors.hpp"

namespace bohmctx::numerics {

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw InvalidInput("fields live on different grids");
}

}  // namespace

Field::Field(Grid grid) : grid_(grid), values_(grid.size()) {}

Field::Field(Grid grid, std::vector<Complex> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw InvalidInput("field: value count does not match grid size");
  }
}

Field& Field::operator*=(Complex factor) {
  for (auto& v : values_) v *= factor;
  return *this;
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](const Complex& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

Spinor::Spinor(Field up_component, Field down_component)
    : up(std::move(up_component)), down(std::move(down_component)) {
  require_same_grid(up.grid(), down.grid());
}

double norm(const Field& f) {
  double sum = 0.0;
  for (const auto& v : f.values()) sum += std::norm(v);
  return std::sqrt(sum * f.grid().cell_volume());
}

double norm(const Spinor& s) {
  const double a = norm(s.up);
  const double b = norm(s.down);
  return std::sqrt(a * a + b * b);
}

Complex overlap(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  Complex sum = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) sum += std::conj(av[i]) * bv[i];
  return sum * a.grid().cell_volume();
}

Complex overlap(const Spinor& a, const Spinor& b) {
  return overlap(a.up, b.up) + overlap(a.down, b.down);
}

double density_overlap(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid());
  double sum = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) sum += std::abs(av[i]) * std::abs(bv[i]);
  return sum * a.grid().cell_volume();
}

Field normalized(Field f) {
  const double n = norm(f);
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("cannot normalize a null field");
  f *= 1.0 / n;
  return f;
}

std::vector<double> density(const Field& f) {
  std::vector<double> rho(f.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(f[i]);
  return rho;
}

std::vector<double> density(const Spinor& s) {
  std::vector<double> rho(s.up.size());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(s.up[i]) + std::norm(s.down[i]);
  return rho;
}

Moments moments(std::span<const double> rho, const Grid& grid) {
  Moments m;
  double total = 0.0;
  Coord first{}, second{};
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const Coord x = grid.coordinate(i);
    total += rho[i];
    for (int d = 0; d < grid.dims(); ++d) {
      const auto k = static_cast<std::size_t>(d);
      first[k] += rho[i] * x[k];
      second[k] += rho[i] * x[k] * x[k];
    }
  }
  for (int d = 0; d < grid.dims(); ++d) {
    const auto k = static_cast<std::size_t>(d);
    m.mean[k] = first[k] / total;
    m.variance[k] = second[k] / total - m.mean[k] * m.mean[k];
  }
  return m;
}

Moments moments(const Field& f) {
  const auto rho = density(f);
  return moments(rho, f.grid());
}

void write_text(std::ostream& out, const Field& f) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Coord x = f.grid().coordinate(i);
    out << x[0] << ' ';
    if (f.grid().dims() == 2) out << x[1] << ' ';
    out << f[i].real() << ' ' << f[i].imag() << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

Field read_text(std::istream& in, const Grid& grid) {
  std::vector<Complex> values;
  values.reserve(grid.size());
  double coord = 0.0, re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (int d = 0; d < grid.dims(); ++d) in >> coord;
    in >> re >> im;
    if (!in) throw InvalidInput("field text: truncated input at point " + std::to_string(i));
    values.emplace_back(re, im);
  }
  return Field(grid, std::move(values));
}

}  // namespace bohmctx::numerics
