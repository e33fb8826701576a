#include "uqalign/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "uqalign/alignment.hpp"
#include "uqalign/calibration.hpp"
#include "uqalign/errors.hpp"
#include "uqalign/fixtures.hpp"
#include "uqalign/ingest.hpp"
#include "uqalign/measures.hpp"
#include "uqalign/statkit.hpp"

namespace uqalign {

namespace {

CheckResult check(std::string name, const std::function<std::string()>& body) {
  CheckResult r{std::move(name), false, {}};
  try {
    r.detail = body();
    r.passed = r.detail.empty();
  } catch (const std::exception& e) {
    r.detail = std::string("exception: ") + e.what();
  }
  return r;
}

std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform01() + 1e-3;
  return renormalize(w).probs;
}

std::size_t adjacent_swaps(std::vector<std::size_t> from, const std::vector<std::size_t>& to) {
  std::vector<std::size_t> target_pos(to.size());
  for (std::size_t p = 0; p < to.size(); ++p) target_pos[to[p]] = p;
  for (auto& v : from) v = target_pos[v];
  std::size_t swaps = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    for (std::size_t j = 0; j + 1 < from.size() - i; ++j) {
      if (from[j] > from[j + 1]) {
        std::swap(from[j], from[j + 1]);
        ++swaps;
      }
    }
  }
  return swaps;
}

constexpr const char* kMiniSurvey =
    "question_id\ttext\tchoice_1\tchoice_2\tchoice_3\tratio_1\tratio_2\tratio_3\n"
    "s1\tKeep?\tYes\tNo\tRefused\t48\t47\t5\n"
    "s2\tKeep?\tYes\tNo\t\t60\t39\t\n"
    "s3\tKeep?\tRefused\tWeb blank\t\t50\t50\t\n"
    "s4\tKeep?\tA lot\tSome\tNone\t33\t33\t33\n";

}  // namespace

std::vector<CheckResult> run_selfcheck() {
  std::vector<CheckResult> out;

  out.push_back(check("entropy identities (uniform = ln n, one-hot = 0)", [] {
    for (std::size_t n = 2; n <= 26; ++n) {
      const std::vector<double> uniform(n, 1.0 / static_cast<double>(n));
      std::vector<double> one_hot(n, 0.0);
      one_hot[n / 2] = 1.0;
      if (std::abs(shannon_entropy(uniform) - std::log(static_cast<double>(n))) > 1e-12 ||
          shannon_entropy(one_hot) != 0.0) {
        return "failed at n=" + std::to_string(n);
      }
    }
    return std::string();
  }));

  out.push_back(check("JSD metric axioms on 1000 random triples", [] {
    Rng rng(7);
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = 2 + rng.below(6);
      const auto p = random_simplex(n, rng), q = random_simplex(n, rng),
                 r = random_simplex(n, rng);
      if (jsd(p, q) != jsd(q, p) || jsd(p, p) != 0.0 ||
          jsd(p, r) > jsd(p, q) + jsd(q, r) + 1e-12) {
        return "violation at triple " + std::to_string(t);
      }
    }
    const std::vector<double> a{1.0, 0.0}, b{0.0, 1.0};
    if (std::abs(jsd(a, b) - std::sqrt(std::log(2.0))) > 1e-9) return std::string("bad maximum");
    return std::string();
  }));

  out.push_back(check("Kendall distance equals adjacent-swap count (n <= 4)", [] {
    for (std::size_t n = 2; n <= 4; ++n) {
      std::vector<std::size_t> a(n);
      std::iota(a.begin(), a.end(), std::size_t{0});
      do {
        std::vector<std::size_t> b(n);
        std::iota(b.begin(), b.end(), std::size_t{0});
        do {
          std::vector<double> va(n), vb(n);
          for (std::size_t p = 0; p < n; ++p) {
            va[a[p]] = static_cast<double>(n - p);
            vb[b[p]] = static_cast<double>(n - p);
          }
          const auto d = kendall_distance(preference_order(va), preference_order(vb));
          const double expect = static_cast<double>(adjacent_swaps(a, b)) /
                                static_cast<double>(n * (n - 1) / 2);
          if (!d || *d != expect) return std::string("mismatch");
        } while (std::next_permutation(b.begin(), b.end()));
      } while (std::next_permutation(a.begin(), a.end()));
    }
    return std::string();
  }));

  out.push_back(check("top-p size non-decreasing in p", [] {
    Rng rng(11);
    for (int t = 0; t < 200; ++t) {
      TokenDistribution d;
      const auto probs = random_simplex(20, rng);
      for (std::size_t i = 0; i < probs.size(); ++i) {
        d.entries.push_back({static_cast<std::int64_t>(i), probs[i]});
      }
      d = validate(d);
      std::size_t last = 0;
      for (double p = 0.05; p <= 1.0; p += 0.05) {
        const std::size_t s = top_p_size(d, p);
        if (s < last) return std::string("size decreased");
        last = s;
      }
    }
    return std::string();
  }));

  out.push_back(check("dump round trip on calibrated fixture", [] {
    const auto records = fixtures::calibrated(3, {.questions = 20});
    std::stringstream ss;
    write_dump(ss, records, {{"format_version", std::string(kFormatVersion)}});
    const auto parsed = parse_dump(ss);
    return parsed.records == records ? std::string() : std::string("records differ");
  }));

  out.push_back(check("JSD shift detects the calibrated fixture (p < 0.05)", [] {
    const auto records = fixtures::calibrated(20240925);
    std::vector<double> h;
    for (const auto& r : records) h.push_back(choice_entropy(r.choice_probs));
    const auto t = jsd_shift_test(records, h, 1000, Rng(20240925));
    if (!(t.test.p_value < 0.05)) return "p = " + std::to_string(t.test.p_value);
    return std::string();
  }));

  out.push_back(check("survey cleaning rule trace", [] {
    std::istringstream in(kMiniSurvey);
    const auto cleaned = clean_survey(read_survey_table(in));
    const CleaningStats expect{4, 3, 1, 1, 2};
    if (!(cleaned.stats == expect)) return std::string("unexpected tallies");
    return std::string();
  }));

  return out;
}

}  // namespace uqalign
