#pragma once

#include <cstdint>
#include <limits>

namespace carvelab {

/// Counter-based 64-bit generator: output i of substream s under seed k is a
/// fixed function of (k, s, i). Independent trials each take their own
/// substream, so results never depend on scheduling. Satisfies
/// UniformRandomBitGenerator, so it plugs into <random> distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))), counter_(0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Fresh generator for task `index` derived from this generator's key.
  Rng substream(std::uint64_t index) const { return Rng(key_, index + 1); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace carvelab
