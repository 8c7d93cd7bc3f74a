#pragma once

#include <cstdint>

namespace gremlab {

/// Stateless 64-bit finalizer (splitmix-style). Chaining mix64 over the
/// fields of a key tuple gives the counter-based pseudorandom function used
/// for disorder draws and for deterministic solver restarts.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace gremlab
