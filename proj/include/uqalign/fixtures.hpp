#pragma once

// Deterministic synthetic datasets for tests, benchmarks and `uqalign selfcheck`.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "uqalign/record.hpp"

namespace uqalign::fixtures {

// Next-token distribution with the answer-label tokens on top of a geometric
// filler spread and a uniform tail. label_mass is the share given to labels.
TokenDistribution label_distribution(std::span<const double> choice_probs, double label_mass,
                                     std::size_t fillers, std::uint64_t tail_count);

struct CalibratedSpec {
  std::size_t questions = 400;
  std::size_t labels = 4;
  double accuracy_high = 0.9;
  double accuracy_low = 0.3;
  std::size_t fillers = 124;
  std::uint64_t tail_count = 5000;
};

// Half the questions are confident (peaked label probabilities, answered
// correctly with accuracy_high), half are hesitant (flat, accuracy_low). Wrong
// answers lean toward early labels, so errors skew the model's answer
// distribution away from the uniform distribution of correct labels.
std::vector<QuestionRecord> calibrated(std::uint64_t seed, const CalibratedSpec& spec = {});

struct AlignmentSpec {
  std::size_t questions = 300;
  // Human shares equal the model's renormalized label probabilities, so human
  // entropy equals choice entropy question by question.
  bool human_matches_model = false;
};

// Survey-style records with mixed choice counts (2 to 7) and integer-percent
// human shares.
std::vector<QuestionRecord> alignment(std::uint64_t seed, const AlignmentSpec& spec = {});

// `values` permuted by a seeded shuffle.
std::vector<double> shuffled(std::span<const double> values, std::uint64_t seed);

}  // namespace uqalign::fixtures
