#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "bohmctx/field.hpp"
#include "bohmctx/spectral.hpp"

namespace bohmctx::numerics {

struct FreePotential {};

/// V(up) = -(hbar/2)(offset + gradient z), V(down) = +(hbar/2)(offset +
/// gradient z). The gyromagnetic factor is folded into both constants, so a
/// positive gradient pushes the up component towards +z. Flipping the sign of
/// `gradient` inverts the field gradient.
struct LinearSpinPotential {
  double gradient = 0.0;
  double offset = 0.0;
};

/// Arbitrary real potential on the grid nodes, applied to every component.
struct SampledPotential {
  std::vector<double> values;
};

using Potential = std::variant<FreePotential, LinearSpinPotential, SampledPotential>;

struct PropagationOptions {
  /// Store a frame every `frame_stride` steps (0 = no intermediate frames).
  /// Frame 0 and the final state are always stored when frames are on.
  std::size_t frame_stride = 0;
  /// Abort when density within 10 cells of the domain edge exceeds 1e-8 of
  /// the peak. Disable only for fields that are meant to fill the box.
  bool support_guard = true;
};

template <class State>
struct Propagation {
  State final_state;
  std::vector<double> frame_times;
  std::vector<State> frames;
};

/// Second-order (Strang) split-operator stepper: half potential, full
/// spectral kinetic step, half potential. A negative dt runs backwards.
class SplitStepper {
 public:
  SplitStepper(const Grid& grid, const Potential& potential, bool spinor,
               double dt, const Units& units);

  void step(Field& f);
  void step(Spinor& s);

  double dt() const { return dt_; }

 private:
  void kinetic(std::span<Complex> data);

  Grid grid_;
  double dt_;
  Fft fft_;
  std::vector<Complex> kinetic_phase_;
  std::vector<Complex> half_potential_up_;    // scalar fields use this one
  std::vector<Complex> half_potential_down_;
};

Propagation<Field> propagate(const Field& initial, const Potential& potential,
                             double dt, std::size_t n_steps, const Units& units,
                             const PropagationOptions& options = {});

Propagation<Spinor> propagate(const Spinor& initial, const Potential& potential,
                              double dt, std::size_t n_steps, const Units& units,
                              const PropagationOptions& options = {});

/// True when density within 10 cells of every domain edge stays below
/// `threshold` times the peak density.
bool support_ok(std::span<const double> density, const Grid& grid,
                double threshold = 1e-8);
void check_support(const Field& f, double t);
void check_support(const Spinor& s, double t);

}  // namespace bohmctx::numerics
