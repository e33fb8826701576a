#include "uqalign/kernels.hpp"

#include <exception>

#ifdef UQALIGN_HAVE_OPENMP
#include <omp.h>
#endif

namespace uqalign::kernels {

namespace {

int team_size(int threads) {
#ifdef UQALIGN_HAVE_OPENMP
  return threads > 0 ? threads : omp_get_max_threads();
#else
  (void)threads;
  return 1;
#endif
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

bool openmp_enabled() {
#ifdef UQALIGN_HAVE_OPENMP
  return true;
#else
  return false;
#endif
}

int max_threads() { return team_size(0); }

std::vector<double> null_distribution_serial(const Resampler& resample, std::size_t iters,
                                             const Rng& rng) {
  std::vector<double> out(iters);
  for (std::size_t i = 0; i < iters; ++i) {
    Rng stream = rng.derive("perm", i);
    out[i] = resample(i, stream);
  }
  return out;
}

std::vector<double> null_distribution_parallel(const Resampler& resample, std::size_t iters,
                                               const Rng& rng, int threads) {
  std::vector<double> out(iters);
  std::vector<std::exception_ptr> errors(iters);
  const auto n = static_cast<std::ptrdiff_t>(iters);
  [[maybe_unused]] const int team = team_size(threads);
#pragma omp parallel for schedule(static) num_threads(team)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      Rng stream = rng.derive("perm", idx);
      out[idx] = resample(idx, stream);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

std::vector<MeasureVector> measure_batch_serial(std::span<const QuestionRecord> records,
                                                const MeasureConfig& cfg,
                                                TruncationPolicy policy) {
  std::vector<MeasureVector> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(compute_measures(r, cfg, policy));
  return out;
}

std::vector<MeasureVector> measure_batch_parallel(std::span<const QuestionRecord> records,
                                                  const MeasureConfig& cfg,
                                                  TruncationPolicy policy, int threads) {
  std::vector<MeasureVector> out(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  [[maybe_unused]] const int team = team_size(threads);
#pragma omp parallel for schedule(dynamic, 16) num_threads(team)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      out[idx] = compute_measures(records[idx], cfg, policy);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return out;
}

}  // namespace uqalign::kernels
