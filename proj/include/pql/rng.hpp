#pragma once

#include <cstdint>
#include <random>

namespace pql {

// Stream tags for fanning one master seed out to independent generators.
// Keyed hashing (splitmix64) keeps streams decorrelated and lets any
// component reconstruct its stream from (master, tag, index) alone.
enum class RngStream : std::uint64_t {
  env = 1,
  noise = 2,
  init = 3,
  sample = 4,
  eval = 5,
  sac = 6,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, RngStream stream, std::uint64_t index = 0) {
  std::uint64_t s = splitmix64(master ^ (static_cast<std::uint64_t>(stream) * 0xd6e8feb86659fd93ull));
  return splitmix64(s ^ splitmix64(index));
}

inline std::mt19937_64 make_rng(std::uint64_t master, RngStream stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

}  // namespace pql
