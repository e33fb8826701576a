#include "uqalign/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"
#include "uqalign/errors.hpp"

namespace uqalign {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

const std::set<std::string, std::less<>> kRequiredFields = {
    "format_version", "question_id", "model_id",       "dataset_id",
    "top_tokens",     "tail_mass",   "tail_count",     "choice_probs",
    "chosen_label",   "choice_count"};
const std::set<std::string, std::less<>> kOptionalFields = {
    "exact_total_entropy", "correct_label", "subject", "human_ratios", "metadata"};

[[noreturn]] void schema(const std::string& what, std::size_t line) {
  throw SchemaError(what, line);
}
[[noreturn]] void invalid(const std::string& what, std::size_t line) {
  throw ValidationError(what, line);
}

const json& field(const json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end()) schema(std::string("missing field '") + key + "'", line);
  return *it;
}

std::string string_field(const json& obj, const char* key, std::size_t line) {
  const auto& v = field(obj, key, line);
  if (!v.is_string()) schema(std::string("field '") + key + "' must be a string", line);
  return v.get<std::string>();
}

double number(const json& v, const std::string& what, std::size_t line) {
  if (!v.is_number()) schema(what + " must be a number", line);
  const double d = v.get<double>();
  if (!std::isfinite(d)) invalid(what + " is not finite", line);
  return d;
}

std::uint64_t count(const json& v, const std::string& what, std::size_t line) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) invalid(what + " must be nonnegative", line);
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  schema(what + " must be an integer", line);
}

bool present(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it != obj.end() && !it->is_null();
}

std::size_t label_field(const json& obj, const char* key, std::size_t n, std::size_t line) {
  const std::string label = string_field(obj, key, line);
  const auto idx = choice_index(label);
  if (!idx || *idx >= n) {
    invalid(std::string(key) + " '" + label + "' is not one of the " + std::to_string(n) +
                " choice labels",
            line);
  }
  return *idx;
}

}  // namespace

QuestionRecord parse_dump_record(std::string_view text, std::size_t line) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    schema(std::string("malformed JSON: ") + e.what(), line);
  }
  if (!obj.is_object()) schema("record must be a JSON object", line);
  for (const auto& [key, _] : obj.items()) {
    if (!kRequiredFields.contains(key) && !kOptionalFields.contains(key)) {
      schema("unexpected field '" + key + "'", line);
    }
  }
  const std::string version = string_field(obj, "format_version", line);
  if (version != kFormatVersion) {
    schema("unsupported format_version '" + version + "'", line);
  }

  QuestionRecord r;
  r.question_id = string_field(obj, "question_id", line);
  r.model_id = string_field(obj, "model_id", line);
  r.dataset_id = string_field(obj, "dataset_id", line);

  const auto& tokens = field(obj, "top_tokens", line);
  if (!tokens.is_array()) schema("top_tokens must be an array", line);
  r.dist.entries.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    const std::string where = "top_tokens[" + std::to_string(i) + "]";
    if (!t.is_object() || t.size() != 3) {
      schema(where + " must be an object with token_text, token_id, prob", line);
    }
    const auto& id = field(t, "token_id", line);
    if (!id.is_number_integer()) schema(where + ".token_id must be an integer", line);
    const auto token_id = id.get<std::int64_t>();
    r.token_text[token_id] = string_field(t, "token_text", line);
    r.dist.entries.push_back({token_id, number(field(t, "prob", line), where + ".prob", line)});
  }
  r.dist.tail_mass = number(field(obj, "tail_mass", line), "tail_mass", line);
  r.dist.tail_count = count(field(obj, "tail_count", line), "tail_count", line);
  if (present(obj, "exact_total_entropy")) {
    r.dist.exact_total_entropy = number(obj["exact_total_entropy"], "exact_total_entropy", line);
  }
  if (r.token_text.size() != r.dist.entries.size()) {
    invalid("top_tokens lists a token_id more than once", line);
  }
  try {
    r.dist = validate(std::move(r.dist));
  } catch (const ValidationError& e) {
    invalid(e.what(), line);
  }

  const std::uint64_t n = count(field(obj, "choice_count", line), "choice_count", line);
  if (n < 2 || n > kMaxChoices) {
    invalid("choice_count " + std::to_string(n) + " outside [2, 26]", line);
  }
  const auto& probs = field(obj, "choice_probs", line);
  if (!probs.is_object()) schema("choice_probs must be an object keyed by label", line);
  if (probs.size() != n) {
    invalid("choice_probs has " + std::to_string(probs.size()) + " labels but choice_count is " +
                std::to_string(n),
            line);
  }
  r.choice_probs.assign(n, 0.0);
  double label_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string label = choice_label(i);
    const auto it = probs.find(label);
    if (it == probs.end()) invalid("choice_probs is missing label " + label, line);
    const double p = number(*it, "choice_probs." + label, line);
    if (p < 0.0 || p > 1.0) invalid("choice_probs." + label + " outside [0,1]", line);
    r.choice_probs[i] = p;
    label_mass += p;
  }
  if (!(label_mass > 0.0)) invalid("choice_probs sum to zero", line);

  r.chosen = label_field(obj, "chosen_label", n, line);
  const std::size_t argmax = argmax_first(r.choice_probs);
  if (r.chosen != argmax) {
    invalid("chosen_label " + choice_label(r.chosen) + " is not the argmax label " +
                choice_label(argmax),
            line);
  }
  if (present(obj, "correct_label")) r.correct = label_field(obj, "correct_label", n, line);
  if (present(obj, "subject")) r.subject = string_field(obj, "subject", line);
  if (present(obj, "human_ratios")) {
    const auto& hr = obj["human_ratios"];
    if (!hr.is_array()) schema("human_ratios must be an array", line);
    if (hr.size() != n) invalid("human_ratios length differs from choice_count", line);
    std::vector<double> ratios;
    double total = 0.0;
    for (std::size_t i = 0; i < hr.size(); ++i) {
      const double v = number(hr[i], "human_ratios[" + std::to_string(i) + "]", line);
      if (v < 0.0) invalid("human_ratios must be nonnegative", line);
      ratios.push_back(v);
      total += v;
    }
    if (!(total > 0.0)) invalid("human_ratios sum to zero", line);
    r.human_ratios = std::move(ratios);
  }
  if (present(obj, "metadata")) {
    if (!obj["metadata"].is_object()) schema("metadata must be an object", line);
    r.metadata = obj["metadata"].dump();
  }
  return r;
}

DumpFile parse_dump(std::istream& in, const ParseOptions& options) {
  DumpFile file;
  std::string text;
  std::size_t line = 0;
  bool seen_content = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    if (!seen_content) {
      seen_content = true;
      // The header, when present, is the first non-blank line.
      const json probe = json::parse(text, nullptr, false);
      if (probe.is_object() && probe.size() == 1 && probe.contains("header")) {
        if (!probe["header"].is_object()) schema("header must be an object", line);
        for (const auto& [k, v] : probe["header"].items()) {
          file.header[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
        continue;
      }
    }
    try {
      file.records.push_back(parse_dump_record(text, line));
    } catch (const ValidationError& e) {
      if (!options.lenient) throw;
      file.skipped.push_back({line, e.what()});
    }
  }
  if (file.records.empty()) file.warnings.push_back("dump contains no records");
  if (!file.skipped.empty()) {
    file.warnings.push_back("skipped " + std::to_string(file.skipped.size()) +
                            " malformed line(s)");
  }
  return file;
}

DumpFile read_dump(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dump file " + path.string());
  return parse_dump(in, options);
}

std::string serialize_dump_record(const QuestionRecord& r) {
  ordered_json obj;
  obj["format_version"] = kFormatVersion;
  obj["question_id"] = r.question_id;
  obj["model_id"] = r.model_id;
  obj["dataset_id"] = r.dataset_id;
  ordered_json tokens = ordered_json::array();
  for (const auto& e : r.dist.entries) {
    const auto it = r.token_text.find(e.token_id);
    tokens.push_back({{"token_text", it == r.token_text.end() ? std::string() : it->second},
                      {"token_id", e.token_id},
                      {"prob", e.prob}});
  }
  obj["top_tokens"] = std::move(tokens);
  obj["tail_mass"] = r.dist.tail_mass;
  obj["tail_count"] = r.dist.tail_count;
  if (r.dist.exact_total_entropy) obj["exact_total_entropy"] = *r.dist.exact_total_entropy;
  ordered_json probs = ordered_json::object();
  for (std::size_t i = 0; i < r.choice_probs.size(); ++i) {
    probs[choice_label(i)] = r.choice_probs[i];
  }
  obj["choice_probs"] = std::move(probs);
  obj["chosen_label"] = choice_label(r.chosen);
  if (r.correct) obj["correct_label"] = choice_label(*r.correct);
  if (r.subject) obj["subject"] = *r.subject;
  if (r.human_ratios) obj["human_ratios"] = *r.human_ratios;
  obj["choice_count"] = r.choice_probs.size();
  if (r.metadata) obj["metadata"] = ordered_json::parse(*r.metadata);
  return obj.dump();
}

void write_dump(std::ostream& out, std::span<const QuestionRecord> records,
                const HeaderFields& header) {
  if (!header.empty()) {
    ordered_json h = ordered_json::object();
    for (const auto& [k, v] : header) h[k] = v;
    out << ordered_json{{"header", h}}.dump() << '\n';
  }
  for (const auto& r : records) out << serialize_dump_record(r) << '\n';
}

std::vector<RecordGroup> group_by_model(std::span<const QuestionRecord> records) {
  std::vector<RecordGroup> groups;
  for (const auto& r : records) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const RecordGroup& g) {
      return g.model_id == r.model_id && g.dataset_id == r.dataset_id;
    });
    if (it == groups.end()) {
      groups.push_back({r.model_id, r.dataset_id, {}});
      it = std::prev(groups.end());
    }
    it->records.push_back(r);
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Survey table
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cells;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double parse_ratio(const std::string& cell, std::size_t line) {
  const std::string t = trim(cell);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    schema("ratio '" + cell + "' is not a number", line);
  }
  if (v < 0.0) schema("ratio '" + cell + "' is negative", line);
  return v;
}

std::string format_fraction(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<RawSurveyQuestion> read_survey_table(std::istream& in) {
  std::vector<RawSurveyQuestion> out;
  std::string text;
  std::size_t line = 0;
  std::size_t width = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty() || text.front() == '#') continue;
    const auto cells = split_tabs(text);
    if (width == 0) {
      // header row
      if (cells.size() < 4 || (cells.size() - 2) % 2 != 0 || cells[0] != "question_id" ||
          cells[1] != "text") {
        schema("survey header must be question_id, text, choice_1..choice_K, ratio_1..ratio_K",
               line);
      }
      const std::size_t k = (cells.size() - 2) / 2;
      for (std::size_t j = 0; j < k; ++j) {
        if (cells[2 + j] != "choice_" + std::to_string(j + 1) ||
            cells[2 + k + j] != "ratio_" + std::to_string(j + 1)) {
          schema("survey header column names out of order", line);
        }
      }
      width = cells.size();
      continue;
    }
    if (cells.size() != width) {
      schema("expected " + std::to_string(width) + " cells, found " +
                 std::to_string(cells.size()),
             line);
    }
    const std::size_t k = (width - 2) / 2;
    RawSurveyQuestion q;
    q.question_id = cells[0];
    q.text = cells[1];
    if (q.question_id.empty()) schema("empty question_id", line);
    bool ended = false;
    for (std::size_t j = 0; j < k; ++j) {
      const std::string& choice = cells[2 + j];
      const std::string& ratio = cells[2 + k + j];
      if (choice.empty()) {
        if (!trim(ratio).empty()) schema("ratio given for an empty choice", line);
        ended = true;
        continue;
      }
      if (ended) schema("choices must be contiguous from choice_1", line);
      if (trim(ratio).empty()) schema("choice '" + choice + "' has no ratio", line);
      q.choices.push_back(choice);
      q.ratios.push_back(parse_ratio(ratio, line));
    }
    if (q.choices.size() > kMaxChoices) {
      schema("question " + q.question_id + " has " + std::to_string(q.choices.size()) +
                 " choices; at most 26 are supported",
             line);
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<RawSurveyQuestion> read_survey_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open survey file " + path.string());
  return read_survey_table(in);
}

const std::vector<std::string>& refusal_options() {
  static const std::vector<std::string> options = {
      "don't know/refused",  "don't know/skipped",     "don't know/skippedrefused",
      "no answer",           "not selected",           "not selected/no answer",
      "not sure/refused",    "not sure/skipped",       "omit",
      "refused",             "refused/web blank",      "skip",
      "skipped",             "skipped on web",         "skipped/refused",
      "skipped/web blank",   "web blank"};
  return options;
}

bool is_refusal(std::string_view choice_text) {
  const std::string key = lower(trim(choice_text));
  const auto& options = refusal_options();
  return std::find(options.begin(), options.end(), key) != options.end();
}

CleanedSurvey clean_survey(std::span<const RawSurveyQuestion> raw) {
  CleanedSurvey out;
  out.stats.total_in = raw.size();
  for (const auto& q : raw) {
    SurveyQuestion kept;
    kept.question_id = q.question_id;
    kept.text = q.text;
    std::vector<double> percents;
    for (std::size_t j = 0; j < q.choices.size(); ++j) {
      if (is_refusal(q.choices[j])) {
        ++out.stats.refusal_choices_removed;
        continue;
      }
      kept.choices.push_back(q.choices[j]);
      percents.push_back(q.ratios[j]);
    }
    if (kept.choices.size() < 2) {
      ++out.stats.dropped_lt2_choices;
      continue;
    }
    double sum = 0.0;
    for (double p : percents) sum += p;
    const double slack = static_cast<double>(kept.choices.size());
    if (!(sum > 100.0 - slack && sum < 100.0 + slack)) {
      ++out.stats.dropped_invalid_sum;
      continue;
    }
    kept.human_ratios = renormalize(percents).probs;
    out.questions.push_back(std::move(kept));
  }
  out.stats.total_out = out.questions.size();
  return out;
}

void write_survey_table(std::ostream& out, std::span<const SurveyQuestion> questions,
                        const HeaderFields& header) {
  for (const auto& [k, v] : header) out << "# " << k << ": " << v << '\n';
  out << "# ratio_units: fraction\n";
  std::size_t k = 2;
  for (const auto& q : questions) k = std::max(k, q.choices.size());
  out << "question_id\ttext";
  for (std::size_t j = 0; j < k; ++j) out << "\tchoice_" << j + 1;
  for (std::size_t j = 0; j < k; ++j) out << "\tratio_" << j + 1;
  out << '\n';
  for (const auto& q : questions) {
    out << q.question_id << '\t' << q.text;
    for (std::size_t j = 0; j < k; ++j) out << '\t' << (j < q.choices.size() ? q.choices[j] : "");
    for (std::size_t j = 0; j < k; ++j) {
      out << '\t' << (j < q.human_ratios.size() ? format_fraction(q.human_ratios[j]) : "");
    }
    out << '\n';
  }
}

}  // namespace uqalign
