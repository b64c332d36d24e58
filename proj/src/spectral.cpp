#include "bohmctx/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <mutex>

#include "bohmctx/errors.hpp"

namespace bohmctx::numerics {

namespace {

// FFTW planning touches global state.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft::Impl {
  Grid grid;
  std::size_t size;
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Impl(const Grid& g) : grid(g), size(g.size()) {
    std::lock_guard lock(planner_mutex());
    buffer = fftw_alloc_complex(size);
    if (buffer == nullptr) throw NumericalFailure("fft: allocation failed");
    if (grid.dims() == 1) {
      const int n = static_cast<int>(grid.axis(0).points);
      forward = fftw_plan_dft_1d(n, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
      backward = fftw_plan_dft_1d(n, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      const int n0 = static_cast<int>(grid.axis(0).points);
      const int n1 = static_cast<int>(grid.axis(1).points);
      forward = fftw_plan_dft_2d(n0, n1, buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
      backward = fftw_plan_dft_2d(n0, n1, buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    if (buffer) fftw_free(buffer);
  }

  void run(std::span<Complex> data, fftw_plan plan, double scale) {
    if (data.size() != size) throw InvalidInput("fft: data size does not match grid");
    std::memcpy(buffer, data.data(), size * sizeof(fftw_complex));
    fftw_execute(plan);
    const auto* out = reinterpret_cast<const Complex*>(buffer);
    if (scale == 1.0) {
      std::copy(out, out + size, data.begin());
    } else {
      std::transform(out, out + size, data.begin(), [scale](Complex v) { return v * scale; });
    }
  }
};

Fft::Fft(const Grid& grid) : impl_(std::make_unique<Impl>(grid)) {}
Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::forward(std::span<Complex> data) { impl_->run(data, impl_->forward, 1.0); }

void Fft::backward(std::span<Complex> data) {
  impl_->run(data, impl_->backward, 1.0 / static_cast<double>(impl_->size));
}

const Grid& Fft::grid() const { return impl_->grid; }

Field spectral_derivative(const Field& f, int axis, Fft& fft) {
  const Grid& grid = f.grid();
  if (axis < 0 || axis >= grid.dims()) throw InvalidInput("derivative: axis out of range");
  if (!(fft.grid() == grid)) throw InvalidInput("derivative: fft planned for another grid");

  Field out = f;
  auto data = out.values();
  fft.forward(data);
  const Axis& a = grid.axis(axis);
  const std::size_t n_axis = a.points;
  const std::size_t nyquist = n_axis % 2 == 0 ? n_axis / 2 : n_axis;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t bin = i;
    if (grid.dims() == 2) {
      const std::size_t n1 = grid.axis(1).points;
      bin = axis == 0 ? i / n1 : i % n1;
    }
    data[i] *= bin == nyquist ? Complex(0.0) : Complex(0.0, a.wavenumber(bin));
  }
  fft.backward(data);
  return out;
}

Field spectral_derivative(const Field& f, int axis) {
  Fft fft(f.grid());
  return spectral_derivative(f, axis, fft);
}

}  // namespace bohmctx::numerics
