#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "uqalign/fixtures.hpp"
#include "uqalign/ingest.hpp"

using namespace uqalign;
namespace fs = std::filesystem;

namespace {

const std::string kCli = UQALIGN_CLI;
const std::string kData = UQALIGN_TEST_DATA;

struct Run {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("uqalign_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args) {
  const auto err = fs::temp_directory_path() / "uqalign_test_cli_stderr.txt";
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

fs::path write_records(const fs::path& dir, const std::vector<QuestionRecord>& recs) {
  const auto path = dir / "dump.jsonl";
  std::ofstream out(path);
  write_dump(out, recs, {{"tool", "test"}});
  return path;
}

}  // namespace

TEST_CASE("missing dump exits 2 and names the path") {
  const auto r = run("measures --dump /nonexistent/none.jsonl --out /tmp");
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/none.jsonl") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run("measures").code == 2);
  CHECK(run("no-such-command").code == 2);
  CHECK(run("measures --dump " + kData + "/golden_dump.jsonl --format xml --out /tmp").code == 2);
}

TEST_CASE("measures writes one row per record") {
  const auto dir = scratch("measures");
  const auto r = run("measures --dump " + kData + "/golden_dump.jsonl --out " + dir.string() +
                     " --k 1,2 --p 0.9,0.5");
  REQUIRE(r.code == 0);
  std::size_t rows = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::istringstream in(slurp(entry.path()));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.starts_with("#") && !line.starts_with("question_id")) ++rows;
    }
  }
  CHECK(rows == 3);
  fs::remove_all(dir);
}

TEST_CASE("align flags a measure equal to human entropy") {
  const auto dir = scratch("align");
  auto recs = fixtures::alignment(17, {120, false});
  for (auto& rec : recs) {
    std::vector<double> human;
    for (double p : rec.choice_probs) human.push_back(p * 100.0);
    rec.human_ratios = human;
  }
  const auto dump = write_records(dir, recs);
  const auto r = run("align --dump " + dump.string() + " --out " + dir.string());
  REQUIRE(r.code == 0);
  bool found = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.path().string().ends_with("_correlations.csv")) continue;
    std::istringstream in(slurp(entry.path()));
    std::string line, columns;
    while (std::getline(in, line)) {
      if (line.starts_with("#")) continue;
      if (columns.empty()) {
        columns = line;
        CHECK(columns.find("top_performing") != std::string::npos);
        continue;
      }
      if (line.starts_with("choice_entropy,")) {
        found = true;
        CHECK(line.find(",1,") != std::string::npos);
        CHECK(line.ends_with("true"));
      }
    }
  }
  CHECK(found);
  CHECK(fs::exists(dir / "alignment_rollup.csv"));
  fs::remove_all(dir);
}

TEST_CASE("calibrate output is identical across runs and thread counts") {
  const auto dir = scratch("calibrate");
  const auto dump = write_records(dir, fixtures::calibrated(8, {120, 4, 0.9, 0.3, 30, 100}));
  const auto a = dir / "a", b = dir / "b";
  const std::string common = "calibrate --dump " + dump.string() + " --iters 300 --seed 5 ";
  REQUIRE(run(common + "--threads 1 --out " + a.string()).code == 0);
  REQUIRE(run(common + "--threads 3 --out " + b.string()).code == 0);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto other = b / entry.path().filename();
    REQUIRE(fs::exists(other));
    CHECK(slurp(entry.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared >= 3);
  fs::remove_all(dir);
}

TEST_CASE("clean-survey writes the table and tallies") {
  const auto dir = scratch("clean");
  const auto r = run("clean-survey --survey " + kData + "/survey_synthetic.tsv --out " + dir.string());
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "cleaned_survey.tsv"));
  const auto stats = slurp(dir / "cleaning_stats.json");
  CHECK(stats.find("\"total_in\": 400") != std::string::npos);
  const auto back = read_survey_table(dir / "cleaned_survey.tsv");
  CHECK(back.size() == 280);
  for (const auto& q : back) {
    double sum = 0.0;
    for (double v : q.ratios) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
  fs::remove_all(dir);
}

TEST_CASE("malformed dump line exits 1 unless lenient") {
  const auto dir = scratch("lenient");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << slurp(kData + "/golden_dump.jsonl") << "{oops\n";
  }
  const std::string base = "measures --dump " + (dir / "bad.jsonl").string() + " --out " + dir.string();
  const auto strict = run(base);
  CHECK(strict.code == 1);
  CHECK(strict.err.find("line 5") != std::string::npos);
  CHECK(run(base + " --lenient").code == 0);
  fs::remove_all(dir);
}
