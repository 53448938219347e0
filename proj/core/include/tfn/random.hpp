#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tfn {

/// Seeded RNG with hand-rolled distributions.
///
/// std::normal_distribution and friends are implementation-defined, which
/// would break the "same seed, bit-identical artifacts" contract across
/// standard libraries.  Everything downstream draws through this wrapper.
class RandomEngine {
 public:
  explicit RandomEngine(uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    // 53 mantissa bits from the top of the 64-bit output
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(gen_() % static_cast<uint64_t>(n));
  }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tfn
