#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uqalign/measures.hpp"
#include "uqalign/record.hpp"
#include "uqalign/statkit.hpp"

namespace uqalign {

// Survey question after cleaning: human_ratios are fractions summing to 1.
struct SurveyQuestion {
  std::string question_id;
  std::string text;
  std::vector<std::string> choices;
  std::vector<double> human_ratios;

  friend bool operator==(const SurveyQuestion&, const SurveyQuestion&) = default;
};

// Entropy (nats) of the renormalized human response shares.
double human_entropy(std::span<const double> ratios);
inline double human_entropy(const SurveyQuestion& q) { return human_entropy(q.human_ratios); }

struct AgreementResult {
  std::size_t n_questions = 0;
  std::size_t agreements = 0;
  double rate = 0.0;
  // Mean over questions of 1 / choice count.
  double random_chance = 0.0;
  TestResult z_test;
  // Questions whose human plurality was shared by several choices. Such a
  // question counts as agreement when the model picked any of the leaders.
  std::size_t plurality_ties = 0;
};

// Top-answer agreement between the cloze choice and the human plurality,
// tested against random chance. Every record needs human_ratios.
AgreementResult agreement(std::span<const QuestionRecord> records);

// Items ordered by preference (value descending, index ascending on ties).
struct Ranking {
  std::vector<std::size_t> order;
  // Per item: dense preference level, equal values share a level.
  std::vector<std::size_t> level;

  std::size_t size() const { return order.size(); }
  // Per position in `order`: true when that item shares its value with another item.
  std::vector<bool> tied_positions() const;
};

Ranking preference_order(std::span<const double> values);

// Normalized Kendall tau distance: discordant pairs over comparable pairs.
// Pairs tied in either ranking are not comparable. nullopt when no pair is.
std::optional<double> kendall_distance(const Ranking& a, const Ranking& b);

enum class CorrelationMethod { pearson, spearman };

struct AlignmentConfig {
  // |r| at or above this is flagged (reporting threshold, not a test).
  double significance_threshold = 0.3;
  // |r| at or above this marks a top-performing measure.
  double top_threshold = 0.5;
  CorrelationMethod method = CorrelationMethod::pearson;
};

struct MeasureCorrelation {
  std::string measure;
  std::optional<double> r;
  // Questions with a value for this measure.
  std::size_t n = 0;
  bool above_threshold = false;
  bool top_performing = false;
};

struct AlignmentReport {
  std::string model_id;
  std::string dataset_id;
  AgreementResult agreement;
  std::optional<double> kendall_mean;
  std::optional<double> kendall_std;
  // Questions with at least one comparable pair.
  std::size_t kendall_n = 0;
  std::vector<MeasureCorrelation> correlations;
  AlignmentConfig config;
};

// records and table rows must be in the same question order.
AlignmentReport alignment_report(std::span<const QuestionRecord> records,
                                 const MeasureTable& table, const AlignmentConfig& cfg = {});

// Measures that are top-performing in every given report.
std::vector<std::string> top_performing_in_all(std::span<const AlignmentReport> reports);

}  // namespace uqalign
