#pragma once

#include <cstdint>
#include <random>

namespace sfd {

// splitmix64 step; used only to scramble seeds, never as the main generator.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Derives the seed for logical stream `index` from a master seed.
// Scheme: two splitmix64 rounds over (master XOR golden_ratio * (index + 1)).
// Replications and bootstrap attempts each use their own stream so they
// can run in any order and still reproduce.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master ^ (0x9E3779B97F4A7C15ull * (index + 1))));
}

inline std::mt19937_64 derived_stream(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(derive_seed(master, index));
}

}  // namespace sfd
