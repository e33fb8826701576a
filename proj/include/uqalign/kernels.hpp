#pragma once

// Data-parallel loops of the toolkit. Each parallel kernel has a serial
// reference with identical results; tests hold them bit-equal and
// bench/bench_kernels times one against the other.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "uqalign/measures.hpp"
#include "uqalign/record.hpp"
#include "uqalign/rng.hpp"

namespace uqalign::kernels {

using Resampler = std::function<double(std::size_t iteration, Rng& stream)>;

// Applies `resample` for iterations 0..iters-1 with stream rng.derive("perm", i).
std::vector<double> null_distribution_serial(const Resampler& resample, std::size_t iters,
                                             const Rng& rng);
// threads <= 0 uses the OpenMP default team size.
std::vector<double> null_distribution_parallel(const Resampler& resample, std::size_t iters,
                                               const Rng& rng, int threads = 0);

std::vector<MeasureVector> measure_batch_serial(std::span<const QuestionRecord> records,
                                                const MeasureConfig& cfg,
                                                TruncationPolicy policy);
// Exceptions are rethrown for the lowest failing record index, matching the serial order.
std::vector<MeasureVector> measure_batch_parallel(std::span<const QuestionRecord> records,
                                                  const MeasureConfig& cfg,
                                                  TruncationPolicy policy, int threads = 0);

// True when the library was built with OpenMP.
bool openmp_enabled();
int max_threads();

}  // namespace uqalign::kernels
