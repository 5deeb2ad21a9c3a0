#pragma once

#include <cstdint>

namespace opinf {

/// Counter-based pseudo-random stream built on the SplitMix64 finalizer.
/// A draw is a pure function of (seed, stream, counter), so streams keyed by
/// work-item index stay stable when more items are added, and every draw is
/// reproducible across platforms (integer ops plus an exact 53-bit ldexp).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : base_(mix(seed ^ mix(stream + 0x9E3779B97F4A7C15ULL))) {}

  std::uint64_t next_u64() {
    return mix(base_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform double in [0, 1); 53 mantissa bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, count).
  std::uint64_t pick(std::uint64_t count) { return next_u64() % count; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace opinf
