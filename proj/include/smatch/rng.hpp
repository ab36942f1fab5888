#pragma once

#include <cstdint>

namespace smatch {

// splitmix64, used only to expand seeds into generator state.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256++ with explicit stream derivation. Every simulation draws
// through this class rather than <random> distributions, so identical
// (seed, stream) pairs produce bit-identical runs on any platform.
class Rng {
 public:
  Rng() : Rng(1, 0) {}

  Rng(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 sm{seed};
    sm.next();
    sm.state += 0x9e3779b97f4a7c15ULL * (stream + 1);
    for (auto& w : s_) w = sm.next();
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Multiply-shift bound; the O(n/2^64) bias is
  // irrelevant at simulation scales.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

// Derives a fresh 64-bit seed for a sub-experiment (e.g. one sweep point).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 sm{seed ^ (0xd1342543de82ef95ULL * (index + 1))};
  sm.next();
  return sm.next();
}

}  // namespace smatch
