#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>

namespace ocep {

/// Seeded generator with platform-stable draws. std::mt19937_64 output is
/// fixed by the standard; the <random> distributions are not, so the
/// helpers below do their own mapping.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be > 0.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  /// Uniform in [lo, hi] for integers.
  long long between(long long lo, long long hi) {
    return lo + static_cast<long long>(below(static_cast<std::size_t>(hi - lo + 1)));
  }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool chance(double p) { return unit() < p; }

  /// Standard normal deviate (Box-Muller).
  double normal() {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace ocep
