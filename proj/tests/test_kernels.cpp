#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "uqalign/calibration.hpp"
#include "uqalign/errors.hpp"
#include "uqalign/fixtures.hpp"
#include "uqalign/kernels.hpp"

using namespace uqalign;

TEST_CASE("null distribution: parallel equals serial bit for bit") {
  const auto recs = fixtures::calibrated(2);
  const auto answers = labeled_answers(recs);
  std::vector<double> u;
  for (const auto& r : recs) u.push_back(total_entropy(r.dist));
  const auto groups = partition(standardize(u), Rng(2));
  const kernels::Resampler resample = [&](std::size_t, Rng& s) {
    auto g = groups;
    s.shuffle(std::span<CertaintyGroup>(g));
    return shift_for_groups(answers, g).shift;
  };
  const Rng rng(31);
  const auto ref = kernels::null_distribution_serial(resample, 500, rng);
  REQUIRE(ref.size() == 500);
  for (int threads : {0, 1, 2, 3, 8}) {
    CHECK(kernels::null_distribution_parallel(resample, 500, rng, threads) == ref);
  }
  CHECK(kernels::null_distribution_serial(resample, 0, rng).empty());
}

TEST_CASE("measure batch: parallel equals serial") {
  const auto recs = fixtures::alignment(3, {250, false});
  const MeasureConfig cfg;
  const auto ref = kernels::measure_batch_serial(recs, cfg, TruncationPolicy::null_cell);
  REQUIRE(ref.size() == recs.size());
  for (int threads : {0, 1, 2, 5}) {
    CHECK(kernels::measure_batch_parallel(recs, cfg, TruncationPolicy::null_cell, threads) ==
          ref);
  }
}

TEST_CASE("parallel batch rethrows the lowest failing index") {
  // 4 labels + 60 fillers listed per record
  auto recs = fixtures::calibrated(4, {40, 4, 0.9, 0.3, 60, 100});
  MeasureConfig cfg;
  cfg.k_values = {5, 50};
  cfg.p_values = {0.5};
  // records 13 and 29 list too few tokens for k=50
  recs[13].question_id = "first-bad";
  recs[13].dist.entries.resize(20);
  recs[29].question_id = "second-bad";
  recs[29].dist.entries.resize(20);
  for (int threads : {1, 4}) {
    try {
      kernels::measure_batch_parallel(recs, cfg, TruncationPolicy::raise, threads);
      FAIL("expected TruncationError");
    } catch (const TruncationError& e) {
      CHECK(std::string(e.what()).find("first-bad") != std::string::npos);
    }
  }
}

TEST_CASE("openmp status is reported") {
  CHECK(kernels::max_threads() >= 1);
  if (!kernels::openmp_enabled()) CHECK(kernels::max_threads() == 1);
}
