#pragma once

#include <cstdint>
#include <string_view>

namespace fairaudit {

// Deterministic, platform-independent RNG. std::mt19937 plus the standard
// distributions would not give reproducible streams across standard library
// implementations, so occlusion synthesis uses this fixed scheme: splitmix64
// for seeding/hashing and xoshiro256** for the stream itself.

struct SplitMix64 {
  uint64_t state;

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

class Rng {
 public:
  explicit Rng(uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& word : state_) word = sm.next();
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Unbiased integer in [0, bound) via Lemire's multiply-shift rejection.
  uint32_t uniform_below(uint32_t bound);

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t state_[4];
};

uint64_t fnv1a64(std::string_view text);

// Stream seed for one work item, so batch results do not depend on
// scheduling order: mixes the global seed with a hash of the item id.
uint64_t derive_stream_seed(uint64_t global_seed, std::string_view stream_id);

}  // namespace fairaudit
