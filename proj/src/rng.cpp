#include "avlab/rng.hpp"

namespace avlab {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> streams) {
  std::uint64_t h = mix64(seed);
  for (auto s : streams) h = mix64(h ^ mix64(s + 0x632BE59BD9B4E019ULL));
  return h;
}

}  // namespace avlab
