// uqalign: uncertainty measures, human alignment and calibration analysis
// for language-model token-probability dumps.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "uqalign/alignment.hpp"
#include "uqalign/calibration.hpp"
#include "uqalign/errors.hpp"
#include "uqalign/ingest.hpp"
#include "uqalign/kernels.hpp"
#include "uqalign/measures.hpp"
#include "uqalign/report.hpp"
#include "uqalign/selfcheck.hpp"

namespace fs = std::filesystem;
using namespace uqalign;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string dump;
  std::string survey;
  std::string out = ".";
  std::string k_values = "5,10,25,50,100";
  std::string p_values = "0.95,0.9,0.75,0.5";
  std::string nucleus = "reach";
  std::string format = "csv";
  std::string sided = "two-sided";
  std::string correlation = "pearson";
  std::string histogram = "binned";
  std::uint64_t seed = 20240925;
  std::size_t iters = 1000;
  std::size_t bins = 30;
  double threshold_r = 0.3;
  double top_r = 0.5;
  int threads = 0;
  bool lenient = false;
  bool invert = false;
  bool no_subjects = false;
};

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* flag) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T v{};
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(std::string("invalid value '") + item + "' in " + flag);
    }
    out.push_back(v);
  }
  return out;
}

MeasureConfig measure_config(const Options& o) {
  MeasureConfig cfg;
  cfg.k_values = parse_list<std::size_t>(o.k_values, "--k");
  cfg.p_values = parse_list<double>(o.p_values, "--p");
  if (o.nucleus == "strict") {
    cfg.nucleus_mode = NucleusMode::strict_below;
  } else if (o.nucleus != "reach") {
    throw UsageError("--nucleus must be 'reach' or 'strict'");
  }
  try {
    cfg.validate();
  } catch (const RangeError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

ReportFormat report_format(const Options& o) {
  if (o.format != "csv" && o.format != "json") throw UsageError("--format must be 'csv' or 'json'");
  return parse_report_format(o.format);
}

void require_file(const std::string& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string(flag) + " is required");
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path);
}

fs::path prepare_out(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

// Run header: tool, version, command, seed and config. No thread count.
HeaderFields header_for(const std::string& command, const Options& o,
                        const std::vector<std::pair<std::string, std::string>>& config) {
  HeaderFields h{{"tool", std::string(kToolName)},
                 {"tool_version", std::string(kToolVersion)},
                 {"format_version", std::string(kFormatVersion)},
                 {"command", command},
                 {"seed", std::to_string(o.seed)}};
  std::string echo;
  for (const auto& [k, v] : config) {
    if (!echo.empty()) echo += ' ';
    echo += k + '=' + v;
  }
  h.emplace_back("config", echo);
  return h;
}

std::vector<std::pair<std::string, std::string>> measure_echo(const Options& o) {
  return {{"k", o.k_values}, {"p", o.p_values}, {"nucleus", o.nucleus}};
}

DumpFile load_dump(const Options& o) {
  require_file(o.dump, "--dump");
  auto file = read_dump(o.dump, {.lenient = o.lenient});
  for (const auto& s : file.skipped) {
    std::cerr << "warning: " << o.dump << ": " << s.message << '\n';
  }
  for (const auto& w : file.warnings) std::cerr << "warning: " << o.dump << ": " << w << '\n';
  if (auto it = file.header.find("label_token_convention"); it != file.header.end()) {
    std::cerr << "label token convention: '" << it->second << "'\n";
  }
  return file;
}

std::vector<MeasureVector> measure_all(std::span<const QuestionRecord> records,
                                       const MeasureConfig& cfg, int threads) {
  auto vectors =
      threads == 1
          ? kernels::measure_batch_serial(records, cfg, TruncationPolicy::null_cell)
          : kernels::measure_batch_parallel(records, cfg, TruncationPolicy::null_cell, threads);
  std::size_t nulls = 0;
  for (const auto& mv : vectors) {
    for (const auto& [_, v] : mv.top_k_entropy) nulls += v ? 0 : 1;
    for (const auto& [_, v] : mv.top_p_entropy) nulls += v ? 0 : 1;
  }
  if (nulls > 0) {
    std::cerr << "warning: " << nulls
              << " measure cell(s) left empty because the dump was too short to resolve them\n";
  }
  return vectors;
}

void announce(const std::vector<fs::path>& files) {
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

std::vector<fs::path> write_text(const fs::path& path,
                                 const std::function<void(std::ostream&)>& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  writer(out);
  if (!out) throw IoError("failed writing " + path.string());
  return {path};
}

int run_measures(const Options& o) {
  const auto cfg = measure_config(o);
  const auto file = load_dump(o);
  const auto dir = prepare_out(o);
  const auto vectors = measure_all(file.records, cfg, o.threads);
  const auto header = header_for("measures", o, measure_echo(o));
  const auto format = report_format(o);
  if (format == ReportFormat::csv) {
    announce(write_text(dir / "measures.csv", [&](std::ostream& s) {
      write_measures_csv(s, file.records, vectors, header);
    }));
  } else {
    announce(write_text(dir / "measures.json", [&](std::ostream& s) {
      write_measures_json(s, file.records, vectors, header);
    }));
  }
  return kExitOk;
}

int run_align(const Options& o) {
  const auto cfg = measure_config(o);
  AlignmentConfig acfg;
  acfg.significance_threshold = o.threshold_r;
  acfg.top_threshold = o.top_r;
  if (o.correlation == "spearman") {
    acfg.method = CorrelationMethod::spearman;
  } else if (o.correlation != "pearson") {
    throw UsageError("--correlation must be 'pearson' or 'spearman'");
  }
  const auto file = load_dump(o);
  const auto dir = prepare_out(o);
  auto echo = measure_echo(o);
  echo.emplace_back("threshold_r", format_value(o.threshold_r));
  echo.emplace_back("top_r", format_value(o.top_r));
  echo.emplace_back("correlation", o.correlation);
  const auto header = header_for("align", o, echo);
  const EmitOptions emit{.format = report_format(o)};

  std::vector<AlignmentReport> reports;
  for (const auto& group : group_by_model(file.records)) {
    const auto vectors = measure_all(group.records, cfg, o.threads);
    reports.push_back(alignment_report(group.records, tabulate(vectors), acfg));
    const std::string stem =
        "alignment_" + file_stem(group.model_id) + "_" + file_stem(group.dataset_id);
    announce(emit_report(reports.back(), dir, stem, header, emit));
    const auto& a = reports.back().agreement;
    std::cout << group.model_id << " / " << group.dataset_id << ": agreement "
              << format_value(a.rate) << " vs chance " << format_value(a.random_chance)
              << " (z=" << format_value(a.z_test.statistic)
              << ", p=" << format_value(a.z_test.p_value) << ")\n";
    if (!a.z_test.warning.empty()) std::cerr << "warning: " << a.z_test.warning << '\n';
  }

  // Measures clearing the top threshold in every model/dataset group.
  const auto joint = top_performing_in_all(reports);
  announce(write_text(dir / "alignment_rollup.csv", [&](std::ostream& s) {
    for (const auto& [k, v] : header) s << "# " << k << ": " << v << '\n';
    s << "measure,groups_top_performing,groups_total,top_in_all\n";
    if (reports.empty()) return;
    for (const auto& c : reports.front().correlations) {
      std::size_t hits = 0;
      for (const auto& rep : reports) {
        for (const auto& rc : rep.correlations) {
          if (rc.measure == c.measure && rc.top_performing) ++hits;
        }
      }
      const bool all = std::find(joint.begin(), joint.end(), c.measure) != joint.end();
      s << c.measure << ',' << hits << ',' << reports.size() << ',' << (all ? "true" : "false")
        << '\n';
    }
  }));
  return kExitOk;
}

int run_calibrate(const Options& o) {
  const auto cfg = measure_config(o);
  CalibrationConfig ccfg;
  ccfg.iters = o.iters;
  ccfg.invert = o.invert;
  ccfg.group_by_subject = !o.no_subjects;
  ccfg.threads = o.threads;
  try {
    ccfg.sided = parse_sided(o.sided);
  } catch (const RangeError& e) {
    throw UsageError(e.what());
  }
  if (o.iters == 0) throw UsageError("--iters must be positive");
  EmitOptions emit;
  emit.format = report_format(o);
  emit.bins = o.bins;
  if (o.histogram == "raw") {
    emit.histogram = HistogramMode::raw;
  } else if (o.histogram != "binned") {
    throw UsageError("--histogram must be 'raw' or 'binned'");
  }

  const auto file = load_dump(o);
  const auto dir = prepare_out(o);
  auto echo = measure_echo(o);
  echo.emplace_back("iters", std::to_string(o.iters));
  echo.emplace_back("sided", std::string(to_string(ccfg.sided)));
  echo.emplace_back("invert", o.invert ? "true" : "false");
  echo.emplace_back("group_by_subject", ccfg.group_by_subject ? "true" : "false");
  echo.emplace_back("histogram", o.histogram);
  echo.emplace_back("bins", std::to_string(o.bins));
  const auto header = header_for("calibrate", o, echo);

  const Rng root(o.seed);
  for (const auto& group : group_by_model(file.records)) {
    const auto vectors = measure_all(group.records, cfg, o.threads);
    const Rng rng = root.derive("calibrate/" + group.model_id + "/" + group.dataset_id, 0);
    const auto report = calibration_report(group.records, tabulate(vectors), rng, ccfg);
    const std::string stem =
        "calibration_" + file_stem(group.model_id) + "_" + file_stem(group.dataset_id);
    announce(emit_report(report, dir, stem, header, emit));
  }
  return kExitOk;
}

int run_clean_survey(const Options& o) {
  require_file(o.survey, "--survey");
  const auto raw = read_survey_table(fs::path(o.survey));
  const auto cleaned = clean_survey(raw);
  const auto dir = prepare_out(o);
  const auto header = header_for("clean-survey", o, {});
  announce(write_text(dir / "cleaned_survey.tsv", [&](std::ostream& s) {
    write_survey_table(s, cleaned.questions, header);
  }));
  announce(write_text(dir / "cleaning_stats.json", [&](std::ostream& s) {
    write_cleaning_stats_json(s, cleaned.stats, header);
  }));
  const auto& st = cleaned.stats;
  std::cout << "questions in " << st.total_in << ", refusal choices removed "
            << st.refusal_choices_removed << ", dropped (<2 choices) " << st.dropped_lt2_choices
            << ", dropped (invalid sum) " << st.dropped_invalid_sum << ", questions out "
            << st.total_out << '\n';
  return kExitOk;
}

int run_selfcheck_command() {
  bool ok = true;
  for (const auto& r : run_selfcheck()) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.passed) std::cout << " -- " << r.detail;
    std::cout << '\n';
    ok = ok && r.passed;
  }
  std::cout << "openmp: " << (kernels::openmp_enabled() ? "on" : "off")
            << ", max threads " << kernels::max_threads() << '\n';
  return ok ? kExitOk : kExitValidation;
}

void add_measure_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--k", o.k_values, "Comma-separated top-k sizes")->capture_default_str();
  cmd->add_option("--p", o.p_values, "Comma-separated top-p thresholds, decreasing")
      ->capture_default_str();
  cmd->add_option("--nucleus", o.nucleus, "Nucleus rule: reach (cumulative >= p) or strict (< p)")
      ->capture_default_str();
}

void add_dump_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--dump", o.dump, "Token dump (JSON lines)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)");
  cmd->add_flag("--lenient", o.lenient, "Skip malformed dump lines instead of failing");
  cmd->add_option("--format", o.format, "Report format: csv or json")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  add_measure_flags(cmd, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inference-time uncertainty measures, human alignment and calibration analysis"};
  app.require_subcommand(1);
  Options o;

  auto* measures = app.add_subcommand("measures", "Compute per-question uncertainty measures");
  add_dump_flags(measures, o);

  auto* align = app.add_subcommand("align", "Alignment with human group uncertainty");
  add_dump_flags(align, o);
  align->add_option("--threshold-r", o.threshold_r, "Reporting threshold on |r|")
      ->capture_default_str();
  align->add_option("--top-r", o.top_r, "Top-performing threshold on |r|")->capture_default_str();
  align->add_option("--correlation", o.correlation, "pearson or spearman")->capture_default_str();

  auto* calibrate = app.add_subcommand("calibrate", "Correctness correlation and JSD shift test");
  add_dump_flags(calibrate, o);
  calibrate->add_option("--iters", o.iters, "Permutation iterations")->capture_default_str();
  calibrate
      ->add_option("--sided", o.sided, "greater, less, two-sided or observed-direction")
      ->capture_default_str();
  calibrate->add_flag("--invert", o.invert, "Treat every measure with flipped orientation");
  calibrate->add_flag("--no-subjects", o.no_subjects, "Do not split correctness by subject");
  calibrate->add_option("--histogram", o.histogram, "Null sample output: binned or raw")
      ->capture_default_str();
  calibrate->add_option("--bins", o.bins, "Histogram bins")->capture_default_str();

  auto* clean = app.add_subcommand("clean-survey", "Filter and renormalize a survey table");
  clean->add_option("--survey", o.survey, "Survey table (tab-separated)");
  clean->add_option("--out", o.out, "Output directory")->capture_default_str();

  app.add_subcommand("selfcheck", "Run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*measures) return run_measures(o);
    if (*align) return run_align(o);
    if (*calibrate) return run_calibrate(o);
    if (*clean) return run_clean_survey(o);
    return run_selfcheck_command();
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
