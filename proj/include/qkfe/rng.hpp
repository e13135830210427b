#pragma once

#include <cstdint>
#include <random>

namespace qkfe {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for work item `index` of a run seeded with `seed`. Depends only on
/// the pair, so any scheduling of items reproduces the same streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_int(Rng& rng, int n) {
  return static_cast<int>(uniform01(rng) * n);
}

}  // namespace qkfe
