#pragma once

#include <cstdint>
#include <random>

namespace renalci {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent generator for work item `stream` under `seed`. Parallel code
/// draws from substream(seed, i) so output never depends on scheduling.
inline Rng substream(std::uint64_t seed, std::uint64_t stream) {
  return Rng(mix64(mix64(seed) ^ mix64(stream + 0x51ed270b27a3c1f5ULL)));
}

}  // namespace renalci
