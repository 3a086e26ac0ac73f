#pragma once

#include <cstdint>
#include <random>

namespace jacpair {

// Per-trial random streams.  A stream is an std::mt19937_64 seeded with
//
//   key = mix(mix(mix(seed ^ domain) ^ a) ^ b)
//
// where mix is the SplitMix64 finalizer, `domain` separates the consumers
// (graph sampling, Haar sampling) and (a, b) is typically (trial, attempt).
// Streams depend only on their key, so trials can be run in any order and on
// any number of workers.

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace stream_domain {
inline constexpr std::uint64_t kGraph = 0x6772617068000001ULL;
inline constexpr std::uint64_t kHaar = 0x6861617200000002ULL;
}  // namespace stream_domain

inline constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t domain,
                                          std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed ^ domain) ^ a) ^ b);
}

using StreamEngine = std::mt19937_64;

inline StreamEngine make_stream(std::uint64_t seed, std::uint64_t domain, std::uint64_t a,
                                std::uint64_t b = 0) {
  return StreamEngine(stream_key(seed, domain, a, b));
}

/// Unbiased draw from [0, bound) by rejection; bound > 0.
template <class Engine>
std::uint64_t uniform_below(Engine& eng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t x = eng();
    if (x >= threshold) return x % bound;
  }
}

}  // namespace jacpair
