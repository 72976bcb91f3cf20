#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace avlab {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x);

// Deterministic child seed for (seed, stream...) so every worker, step and
// example gets its own reproducible RNG stream.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams);

inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> streams = {}) {
  return Rng(derive_seed(seed, streams));
}

}  // namespace avlab
