#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace knodal {

// Every randomized component (multistart, restarts, perturbation probes)
// draws from a named substream of one master seed, so results are
// bit-reproducible regardless of how many other components consumed
// randomness before it.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
  // FNV-1a over the name, then a splitmix-style mix with the master seed.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= master + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= h >> 30; h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27; h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

inline std::mt19937_64 substream(std::uint64_t master, std::string_view name) {
  return std::mt19937_64(substream_seed(master, name));
}

}  // namespace knodal
