#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace awh {

// SplitMix64: 64-bit splittable generator (Steele, Lea, Flood 2014).
// One stream per run; replica r uses seed + r. The draw order is part
// of the reproducibility contract:
//   per inner step k: proposal pick, acceptance test, lambda draw.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Inverse-CDF draw from an unnormalized-free probability vector using a
// single uniform. Ties at a cumulative boundary resolve to the lower
// index.
inline int sample_categorical(std::span<const double> p, double u) {
  double cum = 0.0;
  const int n = int(p.size());
  for (int i = 0; i < n; ++i) {
    cum += p[i];
    if (u <= cum) return i;
  }
  return n - 1;  // guards against cum < 1 from rounding
}

inline int sample_categorical(std::span<const double> p, SplitMix64& rng) {
  return sample_categorical(p, rng.next_double());
}

}  // namespace awh
