#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "uqalign/errors.hpp"
#include "uqalign/fixtures.hpp"
#include "uqalign/ingest.hpp"
#include "uqalign/measures.hpp"

using namespace uqalign;

namespace {

const std::string kData = UQALIGN_TEST_DATA;

std::string valid_line() {
  return R"({"format_version":"1","question_id":"q","model_id":"m","dataset_id":"d",)"
         R"("top_tokens":[{"token_text":" A","token_id":1,"prob":0.7},)"
         R"({"token_text":" B","token_id":2,"prob":0.3}],"tail_mass":0,"tail_count":0,)"
         R"("choice_probs":{"A":0.7,"B":0.3},"chosen_label":"A","choice_count":2})";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

template <typename E>
std::size_t thrown_line(const std::string& text, std::size_t line = 7) {
  try {
    parse_dump_record(text, line);
  } catch (const E& e) {
    REQUIRE(e.line().has_value());
    return *e.line();
  }
  FAIL("no exception");
  return 0;
}

// Rule trace written out step by step, separate from clean_survey.
struct Trace {
  std::size_t refusals = 0, lt2 = 0, bad_sum = 0;
  std::vector<std::string> kept;
};

Trace trace(const std::vector<RawSurveyQuestion>& raw) {
  static const std::set<std::string> list = {
      "don't know/refused", "don't know/skipped", "don't know/skippedrefused", "no answer",
      "not selected", "not selected/no answer", "not sure/refused", "not sure/skipped", "omit",
      "refused", "refused/web blank", "skip", "skipped", "skipped on web", "skipped/refused",
      "skipped/web blank", "web blank"};
  Trace t;
  for (const auto& q : raw) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t j = 0; j < q.choices.size(); ++j) {
      std::string s = q.choices[j];
      while (!s.empty() && s.front() == ' ') s.erase(s.begin());
      while (!s.empty() && s.back() == ' ') s.pop_back();
      for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (list.count(s)) {
        ++t.refusals;
      } else {
        ++n;
        sum += q.ratios[j];
      }
    }
    if (n < 2) {
      ++t.lt2;
    } else if (sum <= 100.0 - n || sum >= 100.0 + n) {
      ++t.bad_sum;
    } else {
      t.kept.push_back(q.question_id);
    }
  }
  return t;
}

RawSurveyQuestion raw(std::vector<std::string> choices, std::vector<double> ratios) {
  return {"r", "text", std::move(choices), std::move(ratios)};
}

}  // namespace

TEST_CASE("golden dump parses to three records") {
  const auto file = read_dump(kData + "/golden_dump.jsonl");
  REQUIRE(file.records.size() == 3);
  CHECK(file.warnings.empty());
  CHECK(file.header.at("model_id") == "tiny-lm");

  const auto& a = file.records[0];
  CHECK(a.question_id == "mmlu-0001");
  CHECK(a.choice_probs == std::vector{0.5, 0.3, 0.2});
  CHECK(a.chosen == 0);
  CHECK(*a.correct == 0);
  CHECK(*a.subject == "astronomy");
  CHECK(a.token_text.at(331) == " B");
  CHECK(std::abs(total_entropy(a.dist) - 1.0296530140645737) < 1e-14);

  const auto& b = file.records[1];
  CHECK(b.dist.truncated());
  CHECK(b.dist.tail_count == 50000);
  CHECK(*b.dist.exact_total_entropy == 4.2);
  CHECK(b.chosen == 1);
  CHECK(*b.correct == 3);
  CHECK_FALSE(b.is_correct());
  CHECK(*b.metadata == R"({"answer_order":[2,0,3,1]})");
  // 0.05/0.05 tie between ids 330 and 332 stays in id order
  CHECK(b.dist.entries[2].token_id == 330);
  CHECK(b.dist.entries[3].token_id == 332);

  const auto& c = file.records[2];
  CHECK(c.dataset_id == "survey");
  CHECK(*c.human_ratios == std::vector{60.0, 40.0});
  CHECK_FALSE(c.correct.has_value());

  const auto groups = group_by_model(file.records);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].dataset_id == "mmlu");
  CHECK(groups[0].records.size() == 2);
}

TEST_CASE("record errors are line tagged") {
  CHECK_NOTHROW(parse_dump_record(valid_line(), 1));
  const auto zero = replace(valid_line(), R"("A":0.7,"B":0.3)", R"("A":0,"B":0)");
  CHECK(thrown_line<ValidationError>(zero) == 7);
  CHECK(thrown_line<SchemaError>(replace(valid_line(), R"("model_id":"m",)", "")) == 7);
  CHECK(thrown_line<SchemaError>(replace(valid_line(), R"("question_id")", R"("x":1,"question_id")")) == 7);
  CHECK(thrown_line<SchemaError>("{not json", 12) == 12);
  CHECK(thrown_line<ValidationError>(replace(valid_line(), R"("prob":0.3)", R"("prob":0.5)")) == 7);
  CHECK(thrown_line<ValidationError>(replace(valid_line(), R"("chosen_label":"A")", R"("chosen_label":"B")")) == 7);
  CHECK(thrown_line<ValidationError>(replace(valid_line(), R"("choice_count":2)", R"("choice_count":3)")) == 7);
  CHECK(thrown_line<SchemaError>(replace(valid_line(), R"("format_version":"1")", R"("format_version":"9")")) == 7);
}

TEST_CASE("parse_dump line numbers, lenient mode and empty input") {
  std::istringstream in("\n" + valid_line() + "\n{broken\n" + valid_line() + "\n");
  try {
    parse_dump(in);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(*e.line() == 3);
  }
  std::istringstream again("\n" + valid_line() + "\n{broken\n" + valid_line() + "\n");
  const auto file = parse_dump(again, {true});
  CHECK(file.records.size() == 2);
  REQUIRE(file.skipped.size() == 1);
  CHECK(file.skipped[0].line == 3);
  CHECK_FALSE(file.warnings.empty());

  std::istringstream empty("");
  const auto none = parse_dump(empty);
  CHECK(none.records.empty());
  CHECK(none.warnings.size() == 1);

  CHECK_THROWS_AS(read_dump(kData + "/does_not_exist.jsonl"), IoError);
}

TEST_CASE("dump round trip") {
  auto recs = fixtures::calibrated(3, {20, 4, 0.9, 0.3, 30, 100});
  recs[0].metadata = R"({"answer_order":[1,0,2,3]})";
  recs[1].human_ratios = std::vector{10.0, 20.0, 30.0, 40.0};
  recs[2].dist.exact_total_entropy = 3.25;
  std::stringstream buf;
  write_dump(buf, recs, {{"tool", "test"}});
  const auto back = parse_dump(buf);
  CHECK(back.header.at("tool") == "test");
  REQUIRE(back.records.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(back.records[i] == recs[i]);

  const auto golden = read_dump(kData + "/golden_dump.jsonl");
  for (const auto& r : golden.records) {
    CHECK(parse_dump_record(serialize_dump_record(r), 1) == r);
  }
}

TEST_CASE("full vocabulary dump entropies match the generator") {
  const auto file = read_dump(kData + "/full_vocab_dump.jsonl");
  std::ifstream in(kData + "/full_vocab_entropy.json");
  const auto expected = nlohmann::json::parse(in);
  REQUIRE(file.records.size() == expected.size());
  for (const auto& r : file.records) {
    CHECK_FALSE(r.dist.truncated());
    const double h = expected.at(r.question_id).get<double>();
    CHECK(std::abs(total_entropy(r.dist) - h) < 1e-9);
  }
}

TEST_CASE("clean_survey examples") {
  const std::vector<RawSurveyQuestion> qs{
      raw({"Yes", "No", "Refused"}, {48, 47, 5}),
      raw({"Yes", "No"}, {60, 39}),
      raw({"Refused", "Web blank", "skip"}, {30, 30, 40}),
  };
  const auto out = clean_survey(qs);
  CHECK(out.stats.total_in == 3);
  CHECK(out.stats.refusal_choices_removed == 4);
  CHECK(out.stats.dropped_invalid_sum == 1);
  CHECK(out.stats.dropped_lt2_choices == 1);
  CHECK(out.stats.total_out == 1);
  const auto& kept = out.questions.at(0);
  CHECK(kept.choices == std::vector<std::string>{"Yes", "No"});
  CHECK(std::abs(kept.human_ratios[0] - 0.6060606060606061) < 1e-15);
  CHECK(std::abs(kept.human_ratios[1] - 0.3939393939393939) < 1e-15);
}

TEST_CASE("clean_survey window is open and refusal matching exact") {
  CHECK(clean_survey(std::vector{raw({"a", "b"}, {49, 49})}).stats.dropped_invalid_sum == 1);
  CHECK(clean_survey(std::vector{raw({"a", "b"}, {51, 51})}).stats.dropped_invalid_sum == 1);
  CHECK(clean_survey(std::vector{raw({"a", "b"}, {49, 50})}).stats.total_out == 1);
  CHECK(clean_survey(std::vector{raw({"a", "b", "c"}, {34, 34, 34})}).stats.total_out == 1);
  CHECK(is_refusal("  REFUSED "));
  CHECK(is_refusal("Don't Know/Refused"));
  CHECK_FALSE(is_refusal("refused to say"));
  CHECK_FALSE(is_refusal("None of the above"));
  CHECK_FALSE(is_refusal("don't know"));
  CHECK(refusal_options().size() == 17);
}

TEST_CASE("committed survey corpus matches the rule trace") {
  const auto qs = read_survey_table(kData + "/survey_synthetic.tsv");
  std::ifstream in(kData + "/survey_synthetic_expected.json");
  const auto expected = nlohmann::json::parse(in);
  const auto out = clean_survey(qs);
  const auto t = trace(qs);

  CHECK(out.stats.total_in == qs.size());
  CHECK(out.stats.refusal_choices_removed == t.refusals);
  CHECK(out.stats.dropped_lt2_choices == t.lt2);
  CHECK(out.stats.dropped_invalid_sum == t.bad_sum);
  CHECK(out.stats.total_out == t.kept.size());

  const auto& s = expected["stats"];
  CHECK(out.stats.total_in == s["total_in"].get<std::size_t>());
  CHECK(out.stats.refusal_choices_removed == s["refusal_choices_removed"].get<std::size_t>());
  CHECK(out.stats.dropped_lt2_choices == s["dropped_lt2_choices"].get<std::size_t>());
  CHECK(out.stats.dropped_invalid_sum == s["dropped_invalid_sum"].get<std::size_t>());
  CHECK(out.stats.total_out == s["total_out"].get<std::size_t>());

  std::vector<std::string> ids;
  for (const auto& q : out.questions) ids.push_back(q.question_id);
  CHECK(ids == t.kept);
  CHECK(ids == expected["kept"].get<std::vector<std::string>>());
  for (const auto& q : out.questions) {
    double sum = 0.0;
    for (double r : q.human_ratios) sum += r;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("cleaning ignores question order") {
  auto qs = read_survey_table(kData + "/survey_synthetic.tsv");
  const auto forward = clean_survey(qs);
  std::reverse(qs.begin(), qs.end());
  const auto backward = clean_survey(qs);
  CHECK(forward.stats == backward.stats);
  auto ids = [](const CleanedSurvey& c) {
    std::set<std::string> s;
    for (const auto& q : c.questions) s.insert(q.question_id);
    return s;
  };
  CHECK(ids(forward) == ids(backward));
}

TEST_CASE("survey table parsing and writing") {
  std::istringstream ok(
      "# comment\n"
      "question_id\ttext\tchoice_1\tchoice_2\tchoice_3\tratio_1\tratio_2\tratio_3\n"
      "a\tQ?\tYes\tNo\t\t55\t45\t\n");
  const auto qs = read_survey_table(ok);
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].choices.size() == 2);

  std::istringstream gap(
      "question_id\ttext\tchoice_1\tchoice_2\tratio_1\tratio_2\n"
      "a\tQ?\t\tNo\t\t45\n");
  CHECK_THROWS_AS(read_survey_table(gap), SchemaError);
  std::istringstream bad_header("id\ttext\tchoice_1\tratio_1\n");
  CHECK_THROWS_AS(read_survey_table(bad_header), SchemaError);
  std::istringstream bad_ratio(
      "question_id\ttext\tchoice_1\tchoice_2\tratio_1\tratio_2\n"
      "a\tQ?\tYes\tNo\tlots\t45\n");
  try {
    read_survey_table(bad_ratio);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(*e.line() == 2);
  }

  std::string header = "question_id\ttext";
  std::string row = "a\tQ?";
  for (int j = 1; j <= 27; ++j) header += "\tchoice_" + std::to_string(j);
  for (int j = 1; j <= 27; ++j) header += "\tratio_" + std::to_string(j);
  for (int j = 1; j <= 27; ++j) row += "\tc" + std::to_string(j);
  for (int j = 1; j <= 27; ++j) row += "\t1";
  std::istringstream wide(header + "\n" + row + "\n");
  CHECK_THROWS_AS(read_survey_table(wide), SchemaError);

  const auto cleaned = clean_survey(qs);
  std::stringstream buf;
  write_survey_table(buf, cleaned.questions, {{"source", "test"}});
  const auto back = read_survey_table(buf);
  REQUIRE(back.size() == 1);
  CHECK(back[0].ratios == std::vector{0.55, 0.45});
}
