#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqalign/core_dist.hpp"
#include "uqalign/rng.hpp"

namespace uqalign {

// Shannon entropy in nats; 0 log 0 is taken as 0.
double shannon_entropy(std::span<const double> probs);
inline double shannon_entropy(const NormalizedSubset& s) { return shannon_entropy(s.view()); }

// Kullback-Leibler divergence D(p || q) in nats. Infinite if p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Jensen-Shannon distance sqrt(D(p||m)/2 + D(q||m)/2), m = (p+q)/2, natural log.
// Bounded by sqrt(ln 2). Throws LengthError on mismatched outcome spaces.
double jsd(std::span<const double> p, std::span<const double> q);
inline double jsd(const NormalizedSubset& p, const NormalizedSubset& q) {
  return jsd(p.view(), q.view());
}

// Sample Pearson product-moment coefficient. Needs equal lengths >= 3 and
// nonzero variance in both inputs.
double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> mid_ranks(std::span<const double> values);

// Pearson over mid-ranks.
double spearman(std::span<const double> x, std::span<const double> y);

// Shift to mean 0 and scale to unit population standard deviation.
std::vector<double> standardize(std::span<const double> values);

enum class Sided {
  greater,
  less,
  two_sided,
  // One-sided in the direction of the observed statistic's sign.
  observed_direction,
};

std::string_view to_string(Sided sided);
Sided parse_sided(std::string_view text);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  Sided sided = Sided::greater;
  // 0 for analytic tests.
  std::size_t n_resamples = 0;
  // Resampled statistics in iteration order (permutation tests only).
  std::vector<double> null_samples;
  // Set when the test's approximation is questionable for this input.
  std::string warning;
};

// Upper tail of the standard normal distribution.
double normal_upper_tail(double z);

// One-sided (greater) one-proportion z test of successes/n against p0.
TestResult one_proportion_ztest(std::uint64_t successes, std::uint64_t n, double p0);

// Produces the statistic for one resampling iteration from its private stream.
using Resampler = std::function<double(std::size_t iteration, Rng& stream)>;

// Add-one permutation p-value of `observed` against `null_samples`.
//   greater: (1 + #{null >= observed}) / (1 + N)
//   less:    (1 + #{null <= observed}) / (1 + N)
//   two_sided: min(1, 2 * min(greater, less))
//   observed_direction: greater if observed >= 0, else less
double permutation_p_value(double observed, std::span<const double> null_samples, Sided sided);

// Runs `iters` resamples. Iteration i draws from rng.derive("perm", i), so the
// result is bit-identical for any thread count. threads == 1 runs the serial
// reference loop; 0 uses the OpenMP default.
TestResult permutation_test(double observed, const Resampler& resample, std::size_t iters,
                            const Rng& rng, Sided sided, int threads = 0);

}  // namespace uqalign
