#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace rose {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent sub-seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-seed for stream `index` of a named purpose under `seed`. Streams with
// different indices are independent, and adding streams never changes the
// earlier ones.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose,
                                    std::uint64_t index) {
  return mix64(mix64(seed ^ mix64(purpose)) ^ index);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t purpose,
                    std::uint64_t index) {
  return Rng(derive_seed(seed, purpose, index));
}

// Purpose tags for derive_seed.
namespace stream {
inline constexpr std::uint64_t kHyperplane = 1;
inline constexpr std::uint64_t kSynthetic = 2;
inline constexpr std::uint64_t kSvm = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kRepetition = 5;
inline constexpr std::uint64_t kReference = 6;
inline constexpr std::uint64_t kBenchmark = 7;
}  // namespace stream

// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
std::vector<int> sample_without_replacement(int n, int count, Rng& rng);

}  // namespace rose
