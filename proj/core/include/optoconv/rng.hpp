#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace optoconv {

// splitmix64 step; used to derive independent sub-streams from one seed so
// that results do not depend on evaluation order.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base ^ mix64(stream));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

// Unbiased draw in [0, n) by rejecting the biased top of the 64-bit range.
// Hand-rolled so shuffles do not depend on the standard library's
// distribution internals.
inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t max64 = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max64 - max64 % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

}  // namespace optoconv
