#pragma once

#include <cstdint>
#include <initializer_list>

namespace prbi {

// stateless keyed hashing: every noise draw is a pure function of its key,
// so renders are idempotent and order-independent
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (std::uint64_t p : parts) h = splitmix64(h ^ p);
  return h;
}

// uniform in [0, 1)
inline double unit_double(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace prbi
