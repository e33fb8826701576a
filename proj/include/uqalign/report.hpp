#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uqalign/alignment.hpp"
#include "uqalign/calibration.hpp"
#include "uqalign/ingest.hpp"
#include "uqalign/measures.hpp"

namespace uqalign {

enum class ReportFormat { csv, json };
ReportFormat parse_report_format(const std::string& text);

enum class HistogramMode {
  // One row per permutation iteration.
  raw,
  // Equal-width bins over the sample range.
  binned,
};

struct EmitOptions {
  ReportFormat format = ReportFormat::csv;
  HistogramMode histogram = HistogramMode::binned;
  std::size_t bins = 30;
};

// Six significant digits, "%.6g" style; empty for nullopt.
std::string format_value(std::optional<double> v);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};
std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t bins);

// Stream writers. CSV output starts with "# key: value" header lines; JSON
// output carries the same block under "header".
void write_measures_csv(std::ostream& out, std::span<const QuestionRecord> records,
                        std::span<const MeasureVector> vectors, const HeaderFields& header);
void write_measures_json(std::ostream& out, std::span<const QuestionRecord> records,
                         std::span<const MeasureVector> vectors, const HeaderFields& header);

void write_alignment_summary_csv(std::ostream& out, const AlignmentReport& report,
                                 const HeaderFields& header);
void write_alignment_correlations_csv(std::ostream& out, const AlignmentReport& report,
                                      const HeaderFields& header);
void write_alignment_json(std::ostream& out, const AlignmentReport& report,
                          const HeaderFields& header);

void write_correctness_csv(std::ostream& out, const CorrectnessMatrix& matrix,
                           const HeaderFields& header);
void write_jsd_shift_csv(std::ostream& out, const CalibrationReport& report,
                         const HeaderFields& header);
void write_calibration_json(std::ostream& out, const CalibrationReport& report,
                            const HeaderFields& header);
void write_null_samples_csv(std::ostream& out, const MeasureShift& shift, HistogramMode mode,
                            std::size_t bins, const HeaderFields& header);

void write_cleaning_stats_json(std::ostream& out, const CleaningStats& stats,
                               const HeaderFields& header);

// File-level emission into `dir`, file names prefixed by `stem`. Returns the
// paths written, in write order. Throws IoError.
std::vector<std::filesystem::path> emit_report(const AlignmentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& stem,
                                               const HeaderFields& header,
                                               const EmitOptions& options = {});
std::vector<std::filesystem::path> emit_report(const CalibrationReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& stem,
                                               const HeaderFields& header,
                                               const EmitOptions& options = {});

// Lowercase alphanumerics, '-', '.' and '_' kept; anything else becomes '_'.
std::string file_stem(const std::string& text);

}  // namespace uqalign
