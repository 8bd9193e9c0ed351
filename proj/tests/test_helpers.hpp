#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bilctrl/torus.hpp"

namespace bilctrl::test {

/// Deterministic uniform doubles in [-1, 1). mt19937_64 output is fixed by
/// the standard, and the bit manipulation avoids the implementation-defined
/// std::uniform_real_distribution.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  double symmetric() {
    return double(eng_() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }

 private:
  std::mt19937_64 eng_;
};

/// Random band-limited field: modes 0..k_max with coefficients in [-1, 1).
inline Field random_field(const TorusGrid& grid, uint64_t seed, int k_max) {
  Rng rng(seed);
  Field f(grid, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    const double a = rng.symmetric();
    const double b = (k == 0) ? 0.0 : rng.symmetric();
    for (int j = 0; j < grid.n(); ++j) {
      const double x = grid.node(j);
      f[j] += a * std::cos(k * x) + b * std::sin(k * x);
    }
  }
  return f;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

}  // namespace bilctrl::test
