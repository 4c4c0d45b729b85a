#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace coopsense {

using Rng = std::mt19937_64;

/// Derives a 64-bit seed for the substream identified by `tags` under
/// `seed`. Distinct tag tuples give statistically independent streams, so
/// work items can be scheduled in any order without changing results.
std::uint64_t derive_seed(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> tags);

inline Rng make_stream(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> tags) {
  return Rng{derive_seed(seed, tags)};
}

/// Serial loops are the reference; parallel kernels must reproduce them
/// bit for bit.
enum class Execution { serial, parallel };

}  // namespace coopsense
