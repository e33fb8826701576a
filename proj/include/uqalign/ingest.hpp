#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uqalign/alignment.hpp"
#include "uqalign/record.hpp"

namespace uqalign {

inline constexpr std::string_view kFormatVersion = "1";
inline constexpr std::string_view kToolName = "uqalign";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Ordered key/value block written at the top of every output file.
using HeaderFields = std::vector<std::pair<std::string, std::string>>;

// ---------------------------------------------------------------------------
// Token dump: UTF-8, one JSON object per line. An optional first line
// {"header": {...}} carries producer metadata (label token convention, model).
// ---------------------------------------------------------------------------

struct ParseOptions {
  // Skip malformed lines (recorded in DumpFile::skipped) instead of throwing.
  bool lenient = false;
};

struct SkippedLine {
  std::size_t line = 0;
  std::string message;
};

struct DumpFile {
  std::map<std::string, std::string> header;
  std::vector<QuestionRecord> records;
  std::vector<SkippedLine> skipped;
  std::vector<std::string> warnings;
};

// Parses and validates one record line. Throws SchemaError or ValidationError
// tagged with `line`.
QuestionRecord parse_dump_record(std::string_view text, std::size_t line);

DumpFile parse_dump(std::istream& in, const ParseOptions& options = {});
// Throws IoError when the file cannot be opened.
DumpFile read_dump(const std::filesystem::path& path, const ParseOptions& options = {});

// Compact single-line JSON for one record (no trailing newline).
std::string serialize_dump_record(const QuestionRecord& record);
void write_dump(std::ostream& out, std::span<const QuestionRecord> records,
                const HeaderFields& header = {});

// Records grouped by (model_id, dataset_id), groups in first-seen order.
struct RecordGroup {
  std::string model_id;
  std::string dataset_id;
  std::vector<QuestionRecord> records;
};
std::vector<RecordGroup> group_by_model(std::span<const QuestionRecord> records);

// ---------------------------------------------------------------------------
// Survey table: tab-separated, '#' lines are comments, header row
//   question_id  text  choice_1 .. choice_K  ratio_1 .. ratio_K
// Unused trailing choice/ratio cells are empty. Raw ratios are percentages.
// ---------------------------------------------------------------------------

struct RawSurveyQuestion {
  std::string question_id;
  std::string text;
  std::vector<std::string> choices;
  std::vector<double> ratios;
};

// Throws SchemaError (line-tagged) on malformed rows or more than 26 choices.
std::vector<RawSurveyQuestion> read_survey_table(std::istream& in);
std::vector<RawSurveyQuestion> read_survey_table(const std::filesystem::path& path);

struct CleaningStats {
  std::size_t total_in = 0;
  std::size_t refusal_choices_removed = 0;
  std::size_t dropped_lt2_choices = 0;
  std::size_t dropped_invalid_sum = 0;
  std::size_t total_out = 0;

  friend bool operator==(const CleaningStats&, const CleaningStats&) = default;
};

struct CleanedSurvey {
  std::vector<SurveyQuestion> questions;
  CleaningStats stats;
};

// Non-response answer texts, lowercase.
const std::vector<std::string>& refusal_options();
bool is_refusal(std::string_view choice_text);

// Removes refusal choices, drops questions left with fewer than two choices,
// drops questions whose remaining percentages do not sum to within the open
// window (100 - N, 100 + N) for N remaining choices, and renormalizes the rest.
CleanedSurvey clean_survey(std::span<const RawSurveyQuestion> raw);

// Cleaned questions in the survey table layout, ratios written as fractions.
void write_survey_table(std::ostream& out, std::span<const SurveyQuestion> questions,
                        const HeaderFields& header = {});

}  // namespace uqalign
