#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace uqalign {

// Seeded generator with named sub-streams. A stream is fully determined by
// (seed, label, index), so work split across threads draws the same numbers
// as a serial loop. Only the engine's raw 64-bit output is used; all
// mappings to ranges are done here so results match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Independent stream for (label, index), derived from this generator's seed.
  Rng derive(std::string_view label, std::uint64_t index) const;

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform integer on [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  bool coin() { return (next_u64() >> 63) != 0; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace uqalign
