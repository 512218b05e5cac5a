#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nsb {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Top 53 bits as a double in [0, 1).
inline constexpr double to_unit(std::uint64_t u) {
  return static_cast<double>(u >> 11) * 0x1.0p-53;
}

inline constexpr std::uint64_t mix_seed(std::uint64_t seed) {
  return splitmix64(seed ^ 0x6a09e667f3bcc909ULL);
}

// Coordinate draw: symbol 0 with probability mu0. The same (seed, key) pair
// always yields the same symbol, which is what makes configurations lazy.
inline constexpr int draw_symbol(std::uint64_t mixed_seed, std::uint64_t key, double mu0) {
  return to_unit(splitmix64(mixed_seed ^ key)) < mu0 ? 0 : 1;
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sub-seed for a named stream: splitmix64(master ^ fnv1a(label) ^ splitmix64(index)).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
  return splitmix64(master ^ fnv1a(label) ^ splitmix64(index + 0x2545f4914f6cdd1dULL));
}

using Engine = std::mt19937_64;

inline double uniform01(Engine& rng) { return to_unit(rng()); }

// Uniform integer in [0, n) by rejection; n > 0.
inline std::uint64_t uniform_below(Engine& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t u;
  do {
    u = rng();
  } while (u >= limit);
  return u % n;
}

}  // namespace nsb
