#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uqalign/core_dist.hpp"
#include "uqalign/record.hpp"

namespace uqalign {

struct MeasureConfig {
  std::vector<std::size_t> k_values{5, 10, 25, 50, 100};
  std::vector<double> p_values{0.95, 0.9, 0.75, 0.5};
  NucleusMode nucleus_mode = NucleusMode::reach;

  // k strictly increasing and positive, p strictly decreasing inside (0,1).
  void validate() const;
};

// What a TruncationError does inside compute_measures.
enum class TruncationPolicy {
  raise,
  // Leave the affected cell empty and keep going.
  null_cell,
};

struct MeasureVector {
  std::string question_id;
  double top1_prob = 0.0;
  double total_entropy = 0.0;
  double choice_entropy = 0.0;
  // In MeasureConfig order; nullopt marks a cell the dump could not resolve.
  std::vector<std::pair<std::size_t, std::optional<double>>> top_k_entropy;
  std::vector<std::pair<double, std::optional<double>>> top_p_entropy;
  std::vector<std::pair<double, std::optional<std::size_t>>> top_p_size;

  friend bool operator==(const MeasureVector&, const MeasureVector&) = default;
};

double top1(const TokenDistribution& dist);

// Full-vocabulary entropy: the producer's exact value when present, otherwise
// listed entries plus the tail spread uniformly over tail_count tokens.
double total_entropy(const TokenDistribution& dist);

// Entropy of the renormalized answer-label probabilities (2 to 26 labels).
double choice_entropy(std::span<const double> label_probs);

double top_k_entropy(const TokenDistribution& dist, std::size_t k);
double top_p_entropy(const TokenDistribution& dist, double p,
                     NucleusMode mode = NucleusMode::reach);
std::size_t top_p_size(const TokenDistribution& dist, double p,
                       NucleusMode mode = NucleusMode::reach);

// Every configured measure for one record. record.dist must be canonical
// (validated). Under TruncationPolicy::raise the TruncationError names the
// offending parameter, e.g. "k=100".
MeasureVector compute_measures(const QuestionRecord& record, const MeasureConfig& cfg,
                               TruncationPolicy policy = TruncationPolicy::raise);

// Whether larger values of a measure mean more or less confidence.
enum class Orientation { uncertainty, certainty };

struct MeasureColumn {
  std::string name;
  Orientation orientation = Orientation::uncertainty;
  std::vector<std::optional<double>> values;
};

// Column view of a batch of measure vectors, one row per question.
struct MeasureTable {
  std::vector<std::string> question_ids;
  std::vector<MeasureColumn> columns;

  const MeasureColumn* find(const std::string& name) const;
};

// Column names in output order for a configuration.
std::vector<std::string> measure_names(const MeasureConfig& cfg);

MeasureTable tabulate(std::span<const MeasureVector> vectors);

// Shortest decimal rendering used in column names ("0.95", "0.9").
std::string format_parameter(double value);

}  // namespace uqalign
