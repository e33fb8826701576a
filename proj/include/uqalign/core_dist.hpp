#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace uqalign {

inline constexpr double kMassTolerance = 1e-6;

struct TokenProb {
  std::int64_t token_id = 0;
  double prob = 0.0;

  friend bool operator==(const TokenProb&, const TokenProb&) = default;
};

// Truncated next-token distribution as written by a producer: the top entries
// plus a summary of the unlisted tail. After validate() the entries are in
// canonical order (prob descending, token_id ascending).
struct TokenDistribution {
  std::vector<TokenProb> entries;
  double tail_mass = 0.0;
  std::uint64_t tail_count = 0;
  // Full-vocabulary entropy in nats, when the producer computed it.
  std::optional<double> exact_total_entropy;

  double listed_mass() const;
  bool truncated() const { return tail_count > 0; }

  friend bool operator==(const TokenDistribution&, const TokenDistribution&) = default;
};

// Renormalized probabilities of a token (or label) subset.
struct NormalizedSubset {
  std::vector<double> probs;
  // Number of tokens in the subset before renormalization.
  std::size_t source_size = 0;

  std::size_t size() const { return probs.size(); }
  std::span<const double> view() const { return probs; }
};

enum class NucleusMode {
  // Smallest prefix whose cumulative probability reaches p.
  reach,
  // Largest prefix whose cumulative probability stays below p (at least one token).
  strict_below,
};

// Checks every TokenDistribution invariant and returns the distribution with
// entries in canonical order. Throws RangeError, MassError or ValidationError.
TokenDistribution validate(TokenDistribution dist);

// Divides each value by the total. Zero entries are kept as zero.
// Throws DegenerateError when the input is empty or sums to zero.
NormalizedSubset renormalize(std::span<const double> values);

// k most probable listed tokens, renormalized. `dist` must be canonical.
// When the dump lists fewer than k tokens and has a tail, throws TruncationError;
// an untruncated dump with fewer than k tokens yields the whole vocabulary.
NormalizedSubset top_k_subset(const TokenDistribution& dist, std::size_t k);

// Nucleus set for threshold p in (0, 1], renormalized. `dist` must be canonical.
NormalizedSubset top_p_set(const TokenDistribution& dist, double p,
                           NucleusMode mode = NucleusMode::reach);

}  // namespace uqalign
