#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace kpkvb {

/// SplitMix64 finalizer. Used for seed derivation only.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives a child seed from a base seed and an ordered list of tags.
/// derive_seed(s, {a, b}) != derive_seed(s, {b, a}) in general.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(base);
  for (auto t : tags) h = mix64(h ^ mix64(t));
  return h;
}

/// Bit pattern of a double, for hashing real-valued cell coordinates into seeds.
inline std::uint64_t seed_tag(double v) noexcept {
  std::uint64_t bits = 0;
  static_assert(sizeof bits == sizeof v);
  __builtin_memcpy(&bits, &v, sizeof v);
  return bits;
}

/// Seeded random source. Wraps mt19937_64 and converts raw bits to reals by
/// hand, so sequences are identical across standard-library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    // Lemire-free rejection: fine for the sizes used here.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Exp(1) variate.
  double exponential() { return -std::log(uniform_pos()); }

  /// Poisson(mean) by accumulating unit-rate exponential inter-arrival times.
  /// Cost is linear in the mean.
  std::uint64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    std::uint64_t k = 0;
    double t = exponential();
    while (t <= mean) {
      ++k;
      t += exponential();
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kpkvb
