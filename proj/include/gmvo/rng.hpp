#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace gmvo {

/// Deterministic generator (SplitMix64 core). Every random choice in the
/// project flows through this type so identical seeds give identical runs
/// on any platform; the standard library distributions are avoided because
/// their output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, n); rejection keeps the draw unbiased.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Poisson draw (Knuth's product method; fine for the small means used here).
  std::uint64_t poisson(double mean) {
    const double limit = std::exp(-mean);
    double product = 1.0;
    std::uint64_t k = 0;
    do {
      ++k;
      product *= next_double();
    } while (product > limit);
    return k - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[bounded(i)]);
    }
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent sub-seed for a named stream of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  Rng rng(base ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
  return rng.next_u64();
}

}  // namespace gmvo
