// Serial reference vs OpenMP kernels on synthetic data.

#include <chrono>
#include <cstdio>
#include <vector>

#include "uqalign/calibration.hpp"
#include "uqalign/fixtures.hpp"
#include "uqalign/kernels.hpp"
#include "uqalign/measures.hpp"

using namespace uqalign;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
  std::printf("openmp %s, %d threads\n", kernels::openmp_enabled() ? "on" : "off",
              kernels::max_threads());

  const auto records = fixtures::calibrated(1, {.questions = 4000, .fillers = 996});
  const MeasureConfig cfg;
  std::vector<MeasureVector> a, b;
  const double serial_m = time_ms(
      [&] { a = kernels::measure_batch_serial(records, cfg, TruncationPolicy::null_cell); }, 3);
  const double parallel_m = time_ms(
      [&] { b = kernels::measure_batch_parallel(records, cfg, TruncationPolicy::null_cell); }, 3);
  std::printf("measure batch (%zu questions x 1000 tokens): serial %.2f ms, parallel %.2f ms, "
              "speedup %.2fx, identical %s\n",
              records.size(), serial_m, parallel_m, serial_m / parallel_m, a == b ? "yes" : "NO");

  const auto small = fixtures::calibrated(2, {.questions = 2000, .fillers = 10});
  const auto answers = labeled_answers(small);
  std::vector<double> h;
  for (const auto& r : small) h.push_back(choice_entropy(r.choice_probs));
  ShiftTest s, p;
  const double serial_p =
      time_ms([&] { s = jsd_shift_test(answers, h, 5000, Rng(9), Sided::two_sided, 1); }, 2);
  const double parallel_p =
      time_ms([&] { p = jsd_shift_test(answers, h, 5000, Rng(9), Sided::two_sided, 0); }, 2);
  std::printf("JSD shift permutation test (%zu questions x 5000 iterations): serial %.2f ms, "
              "parallel %.2f ms, speedup %.2fx, identical %s\n",
              small.size(), serial_p, parallel_p, serial_p / parallel_p,
              s.test.null_samples == p.test.null_samples ? "yes" : "NO");
  return 0;
}
