#pragma once

#include <string_view>

namespace bohmctx {

/// Which of the two branches a run ended up in. Scenarios attach their own
/// names (spin up/down, detector D1/D2) to `plus` and `minus`.
enum class Outcome : int { unresolved = -1, plus = 0, minus = 1 };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::plus: return "+";
    case Outcome::minus: return "-";
    default: return "unresolved";
  }
}

constexpr Outcome opposite(Outcome o) {
  switch (o) {
    case Outcome::plus: return Outcome::minus;
    case Outcome::minus: return Outcome::plus;
    default: return Outcome::unresolved;
  }
}

constexpr bool resolved(Outcome o) { return o != Outcome::unresolved; }

}  // namespace bohmctx
