#pragma once

#include <cstdint>

namespace spbvem {

/// SplitMix64 generator. Output is identical on every platform, unlike the
/// standard distributions, so seeded meshes are reproducible bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent child stream.
  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace spbvem
