#include "uqalign/statkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uqalign/errors.hpp"
#include "uqalign/kernels.hpp"

namespace uqalign {

double shannon_entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  // Rounding can leave -0.0 or a tiny negative for one-hot inputs.
  return h > 0.0 ? h : 0.0;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw LengthError("kl_divergence: outcome spaces differ in size");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

double jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw LengthError("jsd: outcome spaces differ (" + std::to_string(p.size()) + " vs " +
                      std::to_string(q.size()) + ")");
  }
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  const double div = 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(q, m);
  return div > 0.0 ? std::sqrt(div) : 0.0;
}

namespace {

void check_pair(std::span<const double> x, std::span<const double> y, const char* who) {
  if (x.size() != y.size()) {
    throw LengthError(std::string(who) + ": vectors differ in length");
  }
  if (x.size() < 3) throw LengthError(std::string(who) + ": needs at least 3 observations");
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "pearson");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) throw DegenerateError("pearson: zero variance input");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 share the average of ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y, "spearman");
  const auto rx = mid_ranks(x);
  const auto ry = mid_ranks(y);
  try {
    return pearson(rx, ry);
  } catch (const DegenerateError&) {
    throw DegenerateError("spearman: constant input");
  }
}

std::vector<double> standardize(std::span<const double> values) {
  if (values.size() < 2) throw LengthError("standardize: needs at least 2 values");
  const double mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size()));
  if (!(sd > 0.0)) throw DegenerateError("standardize: constant input");
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back((v - mean) / sd);
  return out;
}

std::string_view to_string(Sided sided) {
  switch (sided) {
    case Sided::greater: return "greater";
    case Sided::less: return "less";
    case Sided::two_sided: return "two-sided";
    case Sided::observed_direction: return "observed-direction";
  }
  return "?";
}

Sided parse_sided(std::string_view text) {
  if (text == "greater") return Sided::greater;
  if (text == "less") return Sided::less;
  if (text == "two-sided" || text == "two_sided") return Sided::two_sided;
  if (text == "observed-direction" || text == "observed") return Sided::observed_direction;
  throw RangeError("unknown sidedness '" + std::string(text) + "'");
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

TestResult one_proportion_ztest(std::uint64_t successes, std::uint64_t n, double p0) {
  if (n == 0) throw RangeError("z test needs n > 0");
  if (successes > n) throw RangeError("z test: successes exceed n");
  if (!(p0 > 0.0 && p0 < 1.0)) throw RangeError("z test: p0 must lie in (0,1)");

  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(successes) / nn;
  TestResult result;
  result.statistic = (phat - p0) / std::sqrt(p0 * (1.0 - p0) / nn);
  result.p_value = normal_upper_tail(result.statistic);
  result.sided = Sided::greater;
  if (nn * p0 < 5.0 || nn * (1.0 - p0) < 5.0) {
    result.warning = "normal approximation unreliable: n*p0 or n*(1-p0) below 5";
  }
  return result;
}

double permutation_p_value(double observed, std::span<const double> null_samples, Sided sided) {
  std::size_t at_or_above = 0;
  std::size_t at_or_below = 0;
  for (double v : null_samples) {
    if (v >= observed) ++at_or_above;
    if (v <= observed) ++at_or_below;
  }
  const double denom = 1.0 + static_cast<double>(null_samples.size());
  const double p_greater = (1.0 + static_cast<double>(at_or_above)) / denom;
  const double p_less = (1.0 + static_cast<double>(at_or_below)) / denom;
  switch (sided) {
    case Sided::greater: return p_greater;
    case Sided::less: return p_less;
    case Sided::two_sided: return std::min(1.0, 2.0 * std::min(p_greater, p_less));
    case Sided::observed_direction: return observed >= 0.0 ? p_greater : p_less;
  }
  return 1.0;
}

TestResult permutation_test(double observed, const Resampler& resample, std::size_t iters,
                            const Rng& rng, Sided sided, int threads) {
  if (iters == 0) throw RangeError("permutation test needs at least one iteration");
  TestResult result;
  result.statistic = observed;
  result.sided = sided;
  result.n_resamples = iters;
  result.null_samples = threads == 1 ? kernels::null_distribution_serial(resample, iters, rng)
                                     : kernels::null_distribution_parallel(resample, iters, rng,
                                                                           threads);
  result.p_value = permutation_p_value(observed, result.null_samples, sided);
  return result;
}

}  // namespace uqalign
