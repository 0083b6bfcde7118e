#pragma once

#include <cstdint>

namespace mfa {

/// Counter-based generator: draw j of stream s is a pure function of
/// (seed, s, j), so any partition of streams over threads gives the same draws.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
    return mix(mix(seed_ ^ mix(stream)) + index * 0xd1b54a32d192ed03ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t stream, std::uint64_t index) const {
    return static_cast<double>(bits(stream, index) >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace mfa
