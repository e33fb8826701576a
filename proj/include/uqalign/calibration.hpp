#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uqalign/measures.hpp"
#include "uqalign/record.hpp"
#include "uqalign/rng.hpp"
#include "uqalign/statkit.hpp"

namespace uqalign {

// Spearman correlation between binary correctness and each measure, per subject.
struct CorrectnessMatrix {
  std::vector<std::string> subjects;
  std::vector<std::string> measures;
  // cells[s][m]; nullopt when correctness or the measure is constant in subject s.
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::size_t> subject_sizes;
};

// With group_by_subject false all records form the single subject "all".
CorrectnessMatrix correctness_correlation(std::span<const QuestionRecord> records,
                                          const MeasureTable& table, bool group_by_subject);

enum class CertaintyGroup : std::uint8_t { high, low };

// Standardized uncertainty below zero is high certainty, above zero low
// certainty. Exact zeros take one fair draw each from rng.derive("partition", i).
std::vector<CertaintyGroup> partition(std::span<const double> zscores, const Rng& rng);

// Count vectors over the answer labels for each certainty group.
struct PartitionDistributions {
  std::vector<double> h_model;
  std::vector<double> h_answer;
  std::vector<double> l_model;
  std::vector<double> l_answer;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
};

struct ShiftResult {
  // JSD(H_M, H_A) - JSD(L_M, L_A).
  double shift = 0.0;
  double jsd_high = 0.0;
  double jsd_low = 0.0;
  PartitionDistributions parts;
};

// Model and correct labels per question over a shared label space.
struct LabeledAnswers {
  std::vector<std::uint8_t> model;
  std::vector<std::uint8_t> answer;
  std::size_t label_count = 0;
};

// Throws ValidationError if any record lacks a correct label or the records
// do not share one choice count.
LabeledAnswers labeled_answers(std::span<const QuestionRecord> records);

// Shift for a fixed group assignment. Throws EmptyPartitionError when a group is empty.
ShiftResult shift_for_groups(const LabeledAnswers& answers,
                             std::span<const CertaintyGroup> groups);

// Standardizes `uncertainty` (one value per record), partitions and returns the shift.
ShiftResult jsd_shift(std::span<const QuestionRecord> records, std::span<const double> uncertainty,
                      const Rng& rng);

struct ShiftTest {
  ShiftResult observed;
  TestResult test;
};

// Permutation test of the shift: group labels are shuffled with the observed
// group sizes, iteration i using rng.derive("perm", i).
ShiftTest jsd_shift_test(std::span<const QuestionRecord> records,
                         std::span<const double> uncertainty, std::size_t iters, const Rng& rng,
                         Sided sided = Sided::two_sided, int threads = 0);
ShiftTest jsd_shift_test(const LabeledAnswers& answers, std::span<const double> uncertainty,
                         std::size_t iters, const Rng& rng, Sided sided = Sided::two_sided,
                         int threads = 0);

struct CalibrationConfig {
  std::size_t iters = 1000;
  Sided sided = Sided::two_sided;
  // Flip every measure's orientation before partitioning.
  bool invert = false;
  bool group_by_subject = true;
  int threads = 0;
};

struct MeasureShift {
  std::string measure;
  std::optional<double> shift;
  std::optional<double> jsd_high;
  std::optional<double> jsd_low;
  std::size_t n_high = 0;
  std::size_t n_low = 0;
  std::optional<double> p_value;
  std::vector<double> null_samples;
  // Why the cells are empty, if they are.
  std::string note;
};

struct CalibrationReport {
  std::string model_id;
  std::string dataset_id;
  std::uint64_t seed = 0;
  CalibrationConfig config;
  CorrectnessMatrix correctness;
  std::vector<MeasureShift> shifts;
};

// Full calibration analysis. Measure m draws from rng.derive("jsd-shift/" + m, 0),
// so one measure's result does not depend on which other measures are present.
CalibrationReport calibration_report(std::span<const QuestionRecord> records,
                                     const MeasureTable& table, const Rng& rng,
                                     const CalibrationConfig& cfg = {});

}  // namespace uqalign
