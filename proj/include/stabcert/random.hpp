#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "stabcert/types.hpp"

namespace stabcert {

/// Seeded generator producing identical streams run-to-run (mt19937_64 with
/// explicit bit-to-double conversion; distributions from <random> are
/// implementation-defined and would not reproduce).
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    // Box-Muller; one value per call keeps the stream position simple.
    const double u1 = std::max(uniform01(), 1e-300);
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Complex complex_normal() {
    const double a = normal();
    const double b = normal();
    return Complex(a, b);
  }

  ComplexVector complex_normal_vector(Index n) {
    ComplexVector v(n);
    for (Index i = 0; i < n; ++i) v[i] = complex_normal();
    return v;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stabcert
