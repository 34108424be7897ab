#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace clustreg {

/// Worker count: CLUSTREG_THREADS when set and positive, otherwise the
/// hardware concurrency (at least 1).
unsigned thread_count();

/// Runs body(i) for i in [0, count). Nested calls from inside a worker run
/// serially on the calling thread. Exceptions escaping body are rethrown
/// (the one from the lowest index wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Deterministic child seed for stream `index` of `seed` (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(seed, a), b);
}

using Rng = std::mt19937_64;

}  // namespace clustreg
