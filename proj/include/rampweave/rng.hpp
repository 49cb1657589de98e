#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rampweave {

// Seeded generator with a platform-independent output sequence. mt19937_64 is
// standard-mandated bit-exact; the distributions are inverse-CDF so the draw
// sequence does not depend on the standard library implementation.
class Rng {
 public:
  static constexpr const char* kIdentity = "mt19937_64+inverse-cdf";

  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() {
    // 53-bit mantissa in [0, 1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  // Deterministic derived stream for a named sub-purpose.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt + 0x9E3779B97F4A7C15ULL + (seed << 6) + (seed >> 2));
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rampweave
