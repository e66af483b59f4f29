#include "core/rng.hpp"

#include "core/error.hpp"

namespace fairaudit {

uint32_t Rng::uniform_below(uint32_t bound) {
  if (bound == 0) raise(ErrorCode::InvalidParameter, "uniform_below: zero bound");
  uint64_t x = next_u64() & 0xffffffffULL;
  uint64_t m = x * bound;
  auto low = static_cast<uint32_t>(m);
  if (low < bound) {
    const uint32_t threshold = (0u - bound) % bound;
    while (low < threshold) {
      x = next_u64() & 0xffffffffULL;
      m = x * bound;
      low = static_cast<uint32_t>(m);
    }
  }
  return static_cast<uint32_t>(m >> 32);
}

uint64_t fnv1a64(std::string_view text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

uint64_t derive_stream_seed(uint64_t global_seed, std::string_view stream_id) {
  SplitMix64 sm{global_seed ^ fnv1a64(stream_id)};
  sm.next();
  return sm.next();
}

}  // namespace fairaudit
