#include "uqalign/core_dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "uqalign/errors.hpp"

namespace uqalign {

namespace {

// Slack for comparing accumulated prefix sums against p.
constexpr double kPrefixSlack = 1e-12;

bool in_unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

bool canonical_less(const TokenProb& a, const TokenProb& b) {
  if (a.prob != b.prob) return a.prob > b.prob;
  return a.token_id < b.token_id;
}

}  // namespace

double TokenDistribution::listed_mass() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.prob;
  return sum;
}

TokenDistribution validate(TokenDistribution dist) {
  for (const auto& e : dist.entries) {
    if (!in_unit_interval(e.prob)) {
      throw RangeError("token " + std::to_string(e.token_id) + " has probability " +
                       std::to_string(e.prob) + " outside [0,1]");
    }
  }
  if (!in_unit_interval(dist.tail_mass)) {
    throw RangeError("tail_mass " + std::to_string(dist.tail_mass) + " outside [0,1]");
  }
  if (dist.exact_total_entropy &&
      (!std::isfinite(*dist.exact_total_entropy) || *dist.exact_total_entropy < 0.0)) {
    throw RangeError("exact_total_entropy must be a nonnegative finite number");
  }
  const double total = dist.listed_mass() + dist.tail_mass;
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw MassError("total probability mass " + std::to_string(total) + " is not 1 within 1e-6");
  }
  if (dist.tail_count == 0 && dist.tail_mass > kMassTolerance) {
    throw MassError("tail_mass " + std::to_string(dist.tail_mass) + " with tail_count 0");
  }
  std::unordered_set<std::int64_t> seen;
  seen.reserve(dist.entries.size());
  for (const auto& e : dist.entries) {
    if (!seen.insert(e.token_id).second) {
      throw ValidationError("duplicate token_id " + std::to_string(e.token_id));
    }
  }
  if (!std::is_sorted(dist.entries.begin(), dist.entries.end(), canonical_less)) {
    std::sort(dist.entries.begin(), dist.entries.end(), canonical_less);
  }
  return dist;
}

NormalizedSubset renormalize(std::span<const double> values) {
  if (values.empty()) throw DegenerateError("cannot renormalize an empty list");
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw RangeError("renormalize expects nonnegative finite values");
    }
    sum += v;
  }
  if (sum <= 0.0) throw DegenerateError("cannot renormalize values that sum to zero");

  NormalizedSubset out;
  out.probs.reserve(values.size());
  for (double v : values) out.probs.push_back(v / sum);
  out.source_size = values.size();
  return out;
}

namespace {

NormalizedSubset prefix_subset(const TokenDistribution& dist, std::size_t count) {
  std::vector<double> head;
  head.reserve(count);
  for (std::size_t i = 0; i < count; ++i) head.push_back(dist.entries[i].prob);
  return renormalize(head);
}

}  // namespace

NormalizedSubset top_k_subset(const TokenDistribution& dist, std::size_t k) {
  if (k == 0) throw RangeError("k must be positive");
  if (dist.entries.size() < k) {
    if (dist.truncated()) {
      throw TruncationError("dump lists " + std::to_string(dist.entries.size()) +
                            " tokens but top-k needs " + std::to_string(k));
    }
    k = dist.entries.size();
  }
  if (k == 0) throw EmptyError("distribution has no listed tokens");
  return prefix_subset(dist, k);
}

NormalizedSubset top_p_set(const TokenDistribution& dist, double p, NucleusMode mode) {
  if (!(p > 0.0 && p <= 1.0)) throw RangeError("p must lie in (0,1]");
  if (dist.entries.empty()) throw EmptyError("distribution has no listed tokens");

  double cumulative = 0.0;
  std::size_t count = 0;
  bool reached = false;
  if (mode == NucleusMode::reach) {
    for (const auto& e : dist.entries) {
      cumulative += e.prob;
      ++count;
      if (cumulative >= p - kPrefixSlack) {
        reached = true;
        break;
      }
    }
  } else {
    for (const auto& e : dist.entries) {
      if (cumulative + e.prob >= p - kPrefixSlack) {
        reached = true;
        break;
      }
      cumulative += e.prob;
      ++count;
    }
    count = std::max<std::size_t>(count, 1);
  }

  // An untruncated dump may fall short of p only by rounding; it is the whole vocabulary.
  if (!reached && dist.truncated()) {
    throw TruncationError("listed mass " + std::to_string(dist.listed_mass()) +
                          " does not resolve top-p with p=" + std::to_string(p));
  }
  return prefix_subset(dist, count);
}

}  // namespace uqalign
