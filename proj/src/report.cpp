#include "uqalign/report.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>

#include "json.hpp"
#include "uqalign/errors.hpp"

namespace uqalign {

using ordered_json = nlohmann::ordered_json;

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw RangeError("unknown report format '" + text + "'");
}

std::string format_value(std::optional<double> v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

namespace {

ordered_json json_value(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  // Round-trip through the 6-digit text so JSON and CSV agree.
  return std::strtod(format_value(v).c_str(), nullptr);
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_header_lines(std::ostream& out, const HeaderFields& header) {
  for (const auto& [k, v] : header) out << "# " << k << ": " << v << '\n';
}

ordered_json header_json(const HeaderFields& header) {
  ordered_json h = ordered_json::object();
  for (const auto& [k, v] : header) h[k] = v;
  return h;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::vector<HistogramBin> histogram(std::span<const double> samples, std::size_t bins) {
  std::vector<HistogramBin> out;
  if (samples.empty() || bins == 0) return out;
  const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *min_it;
  const double hi = *max_it;
  if (hi == lo) {
    out.push_back({lo, hi, samples.size()});
    return out;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  out.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = lo + width * static_cast<double>(b);
    out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
  }
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  return out;
}

void write_measures_csv(std::ostream& out, std::span<const QuestionRecord> records,
                        std::span<const MeasureVector> vectors, const HeaderFields& header) {
  write_header_lines(out, header);
  const auto table = tabulate(vectors);
  out << "question_id,model_id,dataset_id";
  for (const auto& c : table.columns) out << ',' << c.name;
  out << '\n';
  for (std::size_t i = 0; i < table.question_ids.size(); ++i) {
    out << csv_cell(table.question_ids[i]) << ',' << csv_cell(records[i].model_id) << ','
        << csv_cell(records[i].dataset_id);
    for (const auto& c : table.columns) out << ',' << format_value(c.values[i]);
    out << '\n';
  }
}

void write_measures_json(std::ostream& out, std::span<const QuestionRecord> records,
                         std::span<const MeasureVector> vectors, const HeaderFields& header) {
  const auto table = tabulate(vectors);
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < table.question_ids.size(); ++i) {
    ordered_json row;
    row["question_id"] = table.question_ids[i];
    row["model_id"] = records[i].model_id;
    row["dataset_id"] = records[i].dataset_id;
    for (const auto& c : table.columns) row[c.name] = json_value(c.values[i]);
    rows.push_back(std::move(row));
  }
  ordered_json doc;
  doc["header"] = header_json(header);
  doc["measures"] = std::move(rows);
  out << doc.dump(2) << '\n';
}

void write_alignment_summary_csv(std::ostream& out, const AlignmentReport& r,
                                 const HeaderFields& header) {
  write_header_lines(out, header);
  const auto& a = r.agreement;
  out << "key,value\n";
  out << "model_id," << csv_cell(r.model_id) << '\n';
  out << "dataset_id," << csv_cell(r.dataset_id) << '\n';
  out << "n_questions," << a.n_questions << '\n';
  out << "agreements," << a.agreements << '\n';
  out << "agreement_rate," << format_value(a.rate) << '\n';
  out << "random_chance," << format_value(a.random_chance) << '\n';
  out << "z_statistic," << format_value(a.z_test.statistic) << '\n';
  out << "z_p_value," << format_value(a.z_test.p_value) << '\n';
  out << "z_sided," << to_string(a.z_test.sided) << '\n';
  out << "z_warning," << csv_cell(a.z_test.warning) << '\n';
  out << "plurality_ties," << a.plurality_ties << '\n';
  out << "kendall_n," << r.kendall_n << '\n';
  out << "kendall_mean," << format_value(r.kendall_mean) << '\n';
  out << "kendall_std," << format_value(r.kendall_std) << '\n';
  out << "correlation," << (r.config.method == CorrelationMethod::pearson ? "pearson" : "spearman")
      << '\n';
  out << "threshold_r," << format_value(r.config.significance_threshold) << '\n';
  out << "top_threshold_r," << format_value(r.config.top_threshold) << '\n';
}

void write_alignment_correlations_csv(std::ostream& out, const AlignmentReport& r,
                                      const HeaderFields& header) {
  write_header_lines(out, header);
  out << "measure,r,n,above_threshold,top_performing\n";
  for (const auto& c : r.correlations) {
    out << csv_cell(c.measure) << ',' << format_value(c.r) << ',' << c.n << ','
        << bool_text(c.above_threshold) << ',' << bool_text(c.top_performing) << '\n';
  }
}

void write_alignment_json(std::ostream& out, const AlignmentReport& r,
                          const HeaderFields& header) {
  const auto& a = r.agreement;
  ordered_json doc;
  doc["header"] = header_json(header);
  doc["model_id"] = r.model_id;
  doc["dataset_id"] = r.dataset_id;
  doc["n_questions"] = a.n_questions;
  doc["agreements"] = a.agreements;
  doc["agreement_rate"] = json_value(a.rate);
  doc["random_chance"] = json_value(a.random_chance);
  doc["z_test"] = {{"statistic", json_value(a.z_test.statistic)},
                   {"p_value", json_value(a.z_test.p_value)},
                   {"sided", std::string(to_string(a.z_test.sided))},
                   {"warning", a.z_test.warning}};
  doc["plurality_ties"] = a.plurality_ties;
  doc["kendall_n"] = r.kendall_n;
  doc["kendall_mean"] = json_value(r.kendall_mean);
  doc["kendall_std"] = json_value(r.kendall_std);
  doc["correlation"] = r.config.method == CorrelationMethod::pearson ? "pearson" : "spearman";
  doc["threshold_r"] = json_value(r.config.significance_threshold);
  doc["top_threshold_r"] = json_value(r.config.top_threshold);
  ordered_json cols = ordered_json::array();
  for (const auto& c : r.correlations) {
    cols.push_back({{"measure", c.measure},
                    {"r", json_value(c.r)},
                    {"n", c.n},
                    {"above_threshold", c.above_threshold},
                    {"top_performing", c.top_performing}});
  }
  doc["correlations"] = std::move(cols);
  out << doc.dump(2) << '\n';
}

void write_correctness_csv(std::ostream& out, const CorrectnessMatrix& m,
                           const HeaderFields& header) {
  write_header_lines(out, header);
  out << "subject,n";
  for (const auto& name : m.measures) out << ',' << csv_cell(name);
  out << '\n';
  for (std::size_t s = 0; s < m.subjects.size(); ++s) {
    out << csv_cell(m.subjects[s]) << ',' << m.subject_sizes[s];
    for (const auto& cell : m.cells[s]) out << ',' << format_value(cell);
    out << '\n';
  }
}

void write_jsd_shift_csv(std::ostream& out, const CalibrationReport& r,
                         const HeaderFields& header) {
  write_header_lines(out, header);
  out << "measure,jsd_shift,jsd_high,jsd_low,n_high,n_low,p_value,sided,iterations,note\n";
  for (const auto& s : r.shifts) {
    out << csv_cell(s.measure) << ',' << format_value(s.shift) << ','
        << format_value(s.jsd_high) << ',' << format_value(s.jsd_low) << ',' << s.n_high << ','
        << s.n_low << ',' << format_value(s.p_value) << ',' << to_string(r.config.sided) << ','
        << s.null_samples.size() << ',' << csv_cell(s.note) << '\n';
  }
}

void write_calibration_json(std::ostream& out, const CalibrationReport& r,
                            const HeaderFields& header) {
  ordered_json doc;
  doc["header"] = header_json(header);
  doc["model_id"] = r.model_id;
  doc["dataset_id"] = r.dataset_id;
  doc["seed"] = r.seed;
  doc["iterations"] = r.config.iters;
  doc["sided"] = std::string(to_string(r.config.sided));
  ordered_json corr = ordered_json::array();
  for (std::size_t s = 0; s < r.correctness.subjects.size(); ++s) {
    ordered_json row;
    row["subject"] = r.correctness.subjects[s];
    row["n"] = r.correctness.subject_sizes[s];
    ordered_json cells = ordered_json::object();
    for (std::size_t m = 0; m < r.correctness.measures.size(); ++m) {
      cells[r.correctness.measures[m]] = json_value(r.correctness.cells[s][m]);
    }
    row["spearman"] = std::move(cells);
    corr.push_back(std::move(row));
  }
  doc["correctness_correlation"] = std::move(corr);
  ordered_json shifts = ordered_json::array();
  for (const auto& s : r.shifts) {
    shifts.push_back({{"measure", s.measure},
                      {"jsd_shift", json_value(s.shift)},
                      {"jsd_high", json_value(s.jsd_high)},
                      {"jsd_low", json_value(s.jsd_low)},
                      {"n_high", s.n_high},
                      {"n_low", s.n_low},
                      {"p_value", json_value(s.p_value)},
                      {"note", s.note}});
  }
  doc["jsd_shift"] = std::move(shifts);
  out << doc.dump(2) << '\n';
}

void write_null_samples_csv(std::ostream& out, const MeasureShift& shift, HistogramMode mode,
                            std::size_t bins, const HeaderFields& header) {
  write_header_lines(out, header);
  out << "# measure: " << shift.measure << '\n';
  out << "# observed_shift: " << format_value(shift.shift) << '\n';
  if (mode == HistogramMode::raw) {
    out << "iteration,jsd_shift\n";
    for (std::size_t i = 0; i < shift.null_samples.size(); ++i) {
      out << i << ',' << format_value(shift.null_samples[i]) << '\n';
    }
    return;
  }
  out << "bin_lo,bin_hi,count\n";
  for (const auto& b : histogram(shift.null_samples, bins)) {
    out << format_value(b.lo) << ',' << format_value(b.hi) << ',' << b.count << '\n';
  }
}

void write_cleaning_stats_json(std::ostream& out, const CleaningStats& s,
                               const HeaderFields& header) {
  ordered_json doc;
  doc["header"] = header_json(header);
  doc["total_in"] = s.total_in;
  doc["refusal_choices_removed"] = s.refusal_choices_removed;
  doc["dropped_lt2_choices"] = s.dropped_lt2_choices;
  doc["dropped_invalid_sum"] = s.dropped_invalid_sum;
  doc["total_out"] = s.total_out;
  out << doc.dump(2) << '\n';
}

std::string file_stem(const std::string& text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_') {
      out += static_cast<char>(std::tolower(c));
    } else {
      out += '_';
    }
  }
  return out.empty() ? "unnamed" : out;
}

namespace {

using Writer = std::function<void(std::ostream&)>;

void write_file(std::vector<std::filesystem::path>& written, const std::filesystem::path& path,
                const Writer& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
  written.push_back(path);
}

}  // namespace

std::vector<std::filesystem::path> emit_report(const AlignmentReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& stem,
                                               const HeaderFields& header,
                                               const EmitOptions& options) {
  std::vector<std::filesystem::path> written;
  if (options.format == ReportFormat::json) {
    write_file(written, dir / (stem + ".json"),
               [&](std::ostream& o) { write_alignment_json(o, report, header); });
  } else {
    write_file(written, dir / (stem + "_summary.csv"),
               [&](std::ostream& o) { write_alignment_summary_csv(o, report, header); });
    write_file(written, dir / (stem + "_correlations.csv"),
               [&](std::ostream& o) { write_alignment_correlations_csv(o, report, header); });
  }
  return written;
}

std::vector<std::filesystem::path> emit_report(const CalibrationReport& report,
                                               const std::filesystem::path& dir,
                                               const std::string& stem,
                                               const HeaderFields& header,
                                               const EmitOptions& options) {
  std::vector<std::filesystem::path> written;
  if (options.format == ReportFormat::json) {
    write_file(written, dir / (stem + ".json"),
               [&](std::ostream& o) { write_calibration_json(o, report, header); });
  } else {
    write_file(written, dir / (stem + "_correctness.csv"),
               [&](std::ostream& o) { write_correctness_csv(o, report.correctness, header); });
    write_file(written, dir / (stem + "_jsd_shift.csv"),
               [&](std::ostream& o) { write_jsd_shift_csv(o, report, header); });
  }
  for (const auto& shift : report.shifts) {
    if (shift.null_samples.empty()) continue;
    write_file(written, dir / (stem + "_null_" + file_stem(shift.measure) + ".csv"),
               [&](std::ostream& o) {
                 write_null_samples_csv(o, shift, options.histogram, options.bins, header);
               });
  }
  return written;
}

}  // namespace uqalign
