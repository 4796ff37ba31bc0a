#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace aircomp {

using Rng = std::mt19937_64;

// Stream labels used when deriving independent sub-streams from one seed.
enum class Stream : std::uint64_t {
  placement = 0x706c6163,
  channel = 0x6368616e,
  trial = 0x74726961,
  truth = 0x74727574,
  sensing = 0x73656e73,
  rx_noise = 0x72786e6f,
  random_baseline = 0x72616e64,
  features = 0x66656174,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Hashes a seed and a path of identifiers into a sub-stream seed. Distinct
/// paths give statistically independent generators.
inline std::uint64_t substream_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t id : path) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

inline std::uint64_t substream_seed(std::uint64_t seed, Stream s,
                                    std::initializer_list<std::uint64_t> path = {}) {
  std::uint64_t h = substream_seed(seed, {static_cast<std::uint64_t>(s)});
  for (std::uint64_t id : path) h = splitmix64(h ^ splitmix64(id + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed, Stream s, std::initializer_list<std::uint64_t> path = {}) {
  return Rng(substream_seed(seed, s, path));
}

}  // namespace aircomp
