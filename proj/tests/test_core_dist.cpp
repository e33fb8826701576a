#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "uqalign/core_dist.hpp"
#include "uqalign/errors.hpp"
#include "uqalign/rng.hpp"

using namespace uqalign;

namespace {

TokenDistribution make(std::vector<double> probs, double tail_mass = 0.0,
                       std::uint64_t tail_count = 0) {
  TokenDistribution d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d.entries.push_back({static_cast<std::int64_t>(i + 1), probs[i]});
  }
  d.tail_mass = tail_mass;
  d.tail_count = tail_count;
  return validate(d);
}

std::vector<double> random_probs(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform01();
  return renormalize(v).probs;
}

}  // namespace

TEST_CASE("validate accepts unit-mass distributions") {
  TokenDistribution d{{{7, 0.6}, {3, 0.4}}, 0.0, 0, std::nullopt};
  CHECK_NOTHROW(validate(d));

  TokenDistribution with_tail{{{1, 0.5}}, 0.5, 100, std::nullopt};
  CHECK_NOTHROW(validate(with_tail));
}

TEST_CASE("validate rejects bad mass and ranges") {
  CHECK_THROWS_AS(validate({{{1, 0.6}, {2, 0.6}}, 0.0, 0, std::nullopt}), MassError);
  CHECK_THROWS_AS(validate({{{1, 1.2}, {2, -0.2}}, 0.0, 0, std::nullopt}), RangeError);
  CHECK_THROWS_AS(validate({{{1, 0.5}}, 1.5, 3, std::nullopt}), RangeError);
  // tail mass without tail tokens
  CHECK_THROWS_AS(validate({{{1, 0.5}}, 0.5, 0, std::nullopt}), MassError);
  CHECK_THROWS_AS(validate({{{1, 0.5}, {1, 0.5}}, 0.0, 0, std::nullopt}), ValidationError);
  CHECK_THROWS_AS(validate({{{1, NAN}}, 0.0, 0, std::nullopt}), RangeError);
  CHECK_THROWS_AS(validate({{{1, 1.0}}, 0.0, 0, -1.0}), RangeError);
}

TEST_CASE("validate tolerates half-precision rounding within 1e-6") {
  CHECK_NOTHROW(validate({{{1, 0.6}, {2, 0.4 - 9e-7}}, 0.0, 0, std::nullopt}));
  CHECK_THROWS_AS(validate({{{1, 0.6}, {2, 0.4 - 2e-6}}, 0.0, 0, std::nullopt}), MassError);
}

TEST_CASE("validate sorts canonically, ties by token id") {
  TokenDistribution d{{{9, 0.2}, {4, 0.4}, {2, 0.4}}, 0.0, 0, std::nullopt};
  const auto v = validate(d);
  REQUIRE(v.entries.size() == 3);
  CHECK(v.entries[0].token_id == 2);
  CHECK(v.entries[1].token_id == 4);
  CHECK(v.entries[2].token_id == 9);
  // a second pass changes nothing
  CHECK(validate(v) == v);
}

TEST_CASE("renormalize examples") {
  CHECK(renormalize(std::vector{0.2, 0.2}).probs == std::vector{0.5, 0.5});
  const auto same = renormalize(std::vector{0.6, 0.3, 0.1}).probs;
  CHECK(same[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(same[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(same[2] == doctest::Approx(0.1).epsilon(1e-15));
  // direct division: 0.4/0.5, 0.1/0.5
  const auto r = renormalize(std::vector{0.4, 0.1});
  CHECK(r.probs[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(r.probs[1] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.source_size == 2);
}

TEST_CASE("renormalize degenerate inputs") {
  CHECK_THROWS_AS(renormalize(std::vector<double>{}), DegenerateError);
  CHECK_THROWS_AS(renormalize(std::vector{0.0, 0.0}), DegenerateError);
  CHECK_THROWS_AS(renormalize(std::vector{-0.1, 0.5}), RangeError);
  // zeros are kept
  CHECK(renormalize(std::vector{0.0, 0.25}).probs == std::vector{0.0, 1.0});
}

TEST_CASE("renormalize is idempotent and preserves ratios") {
  Rng rng(42);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> x(2 + rng.below(30));
    for (auto& v : x) v = rng.uniform01() * 10.0;
    const auto once = renormalize(x).probs;
    const auto twice = renormalize(once).probs;
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(once[i] - twice[i]) <= 1e-12);
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] > 0.0 && once[j] > 0.0) {
          CHECK(std::abs(once[i] / once[j] - x[i] / x[j]) <= 1e-9 * std::max(1.0, x[i] / x[j]));
        }
      }
    }
  }
}

TEST_CASE("top_k_subset examples") {
  const auto d = make({0.5, 0.3, 0.2});
  const auto s = top_k_subset(d, 2);
  REQUIRE(s.size() == 2);
  CHECK(s.probs[0] == doctest::Approx(0.625).epsilon(1e-15));
  CHECK(s.probs[1] == doctest::Approx(0.375).epsilon(1e-15));

  CHECK(top_k_subset(make({1.0}), 1).probs == std::vector{1.0});
}

TEST_CASE("top_k_subset boundary tie keeps the lower token id") {
  TokenDistribution d{{{30, 0.3}, {10, 0.4}, {20, 0.3}}, 0.0, 0, std::nullopt};
  d = validate(d);
  const auto s = top_k_subset(d, 2);
  CHECK(s.size() == 2);
  CHECK(d.entries[1].token_id == 20);
  CHECK(s.probs[1] == doctest::Approx(0.3 / 0.7));
}

TEST_CASE("top_k_subset truncation") {
  const auto truncated = make({0.5, 0.3}, 0.2, 50);
  CHECK_THROWS_AS(top_k_subset(truncated, 3), TruncationError);
  // an untruncated vocabulary smaller than k is the whole distribution
  const auto full = make({0.5, 0.3, 0.2});
  CHECK(top_k_subset(full, 10).size() == 3);
  CHECK_THROWS_AS(top_k_subset(full, 0), RangeError);
}

TEST_CASE("top_k at full size reproduces the distribution") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto probs = random_probs(rng, 3 + rng.below(20));
    const auto d = make(probs);
    const auto s = top_k_subset(d, d.entries.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      CHECK(std::abs(s.probs[i] - d.entries[i].prob) <= 1e-12);
    }
  }
}

TEST_CASE("top_p_set default semantics") {
  const auto d = make({0.5, 0.3, 0.2});
  const auto s = top_p_set(d, 0.75);
  CHECK(s.source_size == 2);
  CHECK(s.probs[0] == doctest::Approx(0.625));
  CHECK(s.probs[1] == doctest::Approx(0.375));
  CHECK(top_p_set(d, 0.5).source_size == 1);  // reaches p exactly
  CHECK(top_p_set(d, 0.9).source_size == 3);
  CHECK(top_p_set(d, 1.0).source_size == 3);

  const auto one_hot = make({1.0});
  for (double p : {0.1, 0.5, 0.99, 1.0}) {
    const auto s1 = top_p_set(one_hot, p);
    CHECK(s1.source_size == 1);
    CHECK(s1.probs == std::vector{1.0});
  }
}

TEST_CASE("top_p_set strict mode") {
  const auto d = make({0.5, 0.3, 0.2});
  CHECK(top_p_set(d, 0.75, NucleusMode::strict_below).source_size == 1);
  CHECK(top_p_set(d, 0.81, NucleusMode::strict_below).source_size == 2);
  // never empty
  CHECK(top_p_set(d, 0.1, NucleusMode::strict_below).source_size == 1);
}

TEST_CASE("top_p_set truncation and range") {
  const auto d = make({0.5, 0.3}, 0.2, 1000);
  CHECK(top_p_set(d, 0.75).source_size == 2);
  CHECK_THROWS_AS(top_p_set(d, 0.9), TruncationError);
  CHECK_THROWS_AS(top_p_set(d, 0.0), RangeError);
  CHECK_THROWS_AS(top_p_set(d, 1.5), RangeError);
}

TEST_CASE("top_p size is non-decreasing in p") {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    const auto d = make(random_probs(rng, 2 + rng.below(40)));
    std::size_t last = 0;
    for (int step = 1; step <= 100; ++step) {
      const std::size_t s = top_p_set(d, step / 100.0).source_size;
      CHECK(s >= last);
      last = s;
    }
  }
}

// Oracle: enumerate every prefix and take the shortest that reaches p.
TEST_CASE("top_p_set matches prefix enumeration") {
  Rng rng(123);
  for (int t = 0; t < 300; ++t) {
    const auto d = make(random_probs(rng, 2 + rng.below(15)));
    const double p = 0.05 + 0.9 * rng.uniform01();
    std::size_t expect = d.entries.size();
    for (std::size_t len = 1; len <= d.entries.size(); ++len) {
      double cum = 0.0;
      for (std::size_t i = 0; i < len; ++i) cum += d.entries[i].prob;
      if (cum >= p) {
        expect = len;
        break;
      }
    }
    CHECK(top_p_set(d, p).source_size == expect);
  }
}
