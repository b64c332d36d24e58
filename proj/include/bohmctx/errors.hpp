#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bohmctx {

// Malformed configuration or arguments. The CLI maps this to exit code 1.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Anything that goes wrong while the numbers are running. The CLI maps this
// (and every subclass) to exit code 2.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PropagationFailure : public NumericalFailure {
 public:
  PropagationFailure(const std::string& what, std::size_t step)
      : NumericalFailure(what + " (step " + std::to_string(step) + ")"),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class SupportGuardViolation : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class SeparationFailure : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

}  // namespace bohmctx
