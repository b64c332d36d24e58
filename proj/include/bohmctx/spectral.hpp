#pragma once

#include <memory>
#include <span>

#include "bohmctx/field.hpp"

namespace bohmctx::numerics {

/// In-place complex FFT on a 1D or 2D grid (FFTW, estimate planning so the
/// output is reproducible bit for bit). Not thread-safe; use one per thread.
class Fft {
 public:
  explicit Fft(const Grid& grid);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  /// Unnormalized forward transform.
  void forward(std::span<Complex> data);
  /// Inverse transform including the 1/size factor.
  void backward(std::span<Complex> data);

  const Grid& grid() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Spectral derivative along `axis`. The Nyquist bin is dropped.
Field spectral_derivative(const Field& f, int axis);
Field spectral_derivative(const Field& f, int axis, Fft& fft);

}  // namespace bohmctx::numerics
