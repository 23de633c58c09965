#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hoc {

// Extended precision is used throughout the numerical kernels.
using real = long double;

inline constexpr real real_inf = std::numeric_limits<real>::infinity();
inline constexpr real real_eps = std::numeric_limits<real>::epsilon();

// ---------------------------------------------------------------- errors

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad user input: grammar, missing keys, out-of-range parameters
struct config_error : error {
  using error::error;
};

// a computation that could not deliver its postcondition
struct numeric_error : error {
  using error::error;
};

struct unsupported_family : error {
  using error::error;
};

struct incompatible_measure : error {
  using error::error;
};

struct degenerate_measure : numeric_error {
  using numeric_error::numeric_error;
};

struct wrong_branch : numeric_error {
  using numeric_error::numeric_error;
};

struct oracle_size_error : error {
  using error::error;
};

struct step_too_large : error {
  using error::error;
};

struct precondition_error : error {
  using error::error;
};

// ---------------------------------------------------------------- odds

// gamma = (1-b)/b on (0, +inf]. The infinite case is a tag, never an IEEE inf.
struct odds {
  real value = 0;
  bool infinite = false;

  static odds from_b(real b) {
    if (!(b >= 0 && b < 1)) throw config_error("mutation probability must lie in [0,1)");
    if (b == 0) return {0, true};
    return {(1 - b) / b, false};
  }
};

}  // namespace hoc
