#include "uqalign/rng.hpp"

#include <limits>

namespace uqalign {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

// splitmix64 finalizer
std::uint64_t Rng::mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::derive(std::string_view label, std::uint64_t index) const {
  const std::uint64_t stream = mix(mix(seed_ ^ fnv1a(label)) + index);
  return Rng(stream);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Unbiased: rejects draws from the partial top block.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = 0;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % bound;
}

}  // namespace uqalign
