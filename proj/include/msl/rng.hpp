#pragma once

#include <cstdint>
#include <string_view>

namespace msl {

/// Counter-based generator: the value at (seed, stream, counter) is a pure
/// function of the three, so parallel consumers can draw disjoint counters
/// without sharing state. Mixing is SplitMix64's finalizer.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream) : key_(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL))) {}
  CounterRng(uint64_t seed, std::string_view stream) : CounterRng(seed, hash(stream)) {}

  uint64_t at(uint64_t counter) const { return mix(key_ + counter * 0x9e3779b97f4a7c15ULL); }

  /// Sequential draw.
  uint64_t next() { return at(counter_++); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [lo, hi].
  uint64_t between(uint64_t lo, uint64_t hi) {
    const uint64_t span = hi - lo + 1;
    if (span == 0) return next();
    // Lemire's multiply-shift, with rejection for exact uniformity
    const uint64_t threshold = (0 - span) % span;
    for (;;) {
      const uint64_t x = next();
      const unsigned __int128 m = static_cast<unsigned __int128>(x) * span;
      if (static_cast<uint64_t>(m) >= threshold) return lo + static_cast<uint64_t>(m >> 64);
    }
  }

  static uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static uint64_t hash(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return h;
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace msl
