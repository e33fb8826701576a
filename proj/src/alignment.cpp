#include "uqalign/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uqalign/errors.hpp"

namespace uqalign {

double human_entropy(std::span<const double> ratios) {
  return shannon_entropy(renormalize(ratios));
}

AgreementResult agreement(std::span<const QuestionRecord> records) {
  AgreementResult out;
  if (records.empty()) throw EmptyError("agreement: no records");
  double chance_sum = 0.0;
  for (const auto& r : records) {
    if (!r.human_ratios) {
      throw ValidationError("agreement: record " + r.question_id + " has no human_ratios");
    }
    const auto& human = *r.human_ratios;
    if (human.size() != r.choice_count()) {
      throw ValidationError("agreement: record " + r.question_id +
                            " has mismatched human_ratios length");
    }
    const double top = *std::max_element(human.begin(), human.end());
    const auto leaders = std::count(human.begin(), human.end(), top);
    if (leaders > 1) ++out.plurality_ties;
    if (human[r.chosen] == top) ++out.agreements;
    chance_sum += 1.0 / static_cast<double>(r.choice_count());
  }
  out.n_questions = records.size();
  out.rate = static_cast<double>(out.agreements) / static_cast<double>(out.n_questions);
  out.random_chance = chance_sum / static_cast<double>(out.n_questions);
  out.z_test = one_proportion_ztest(out.agreements, out.n_questions, out.random_chance);
  return out;
}

std::vector<bool> Ranking::tied_positions() const {
  std::vector<std::size_t> per_level(order.size(), 0);
  for (std::size_t item = 0; item < level.size(); ++item) ++per_level[level[item]];
  std::vector<bool> tied(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    tied[pos] = per_level[level[order[pos]]] > 1;
  }
  return tied;
}

Ranking preference_order(std::span<const double> values) {
  if (values.size() < 2) throw LengthError("preference_order needs at least 2 items");
  Ranking r;
  r.order.resize(values.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  r.level.resize(values.size());
  std::size_t lvl = 0;
  for (std::size_t pos = 0; pos < r.order.size(); ++pos) {
    if (pos > 0 && values[r.order[pos]] != values[r.order[pos - 1]]) ++lvl;
    r.level[r.order[pos]] = lvl;
  }
  return r;
}

std::optional<double> kendall_distance(const Ranking& a, const Ranking& b) {
  if (a.size() != b.size()) throw LengthError("kendall_distance: rankings differ in length");
  if (a.size() < 2) throw LengthError("kendall_distance needs at least 2 items");
  const std::size_t n = a.size();
  std::vector<std::size_t> pos_a(n), pos_b(n);
  for (std::size_t p = 0; p < n; ++p) {
    pos_a[a.order[p]] = p;
    pos_b[b.order[p]] = p;
  }
  std::size_t comparable = 0;
  std::size_t discordant = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (a.level[i] == a.level[j] || b.level[i] == b.level[j]) continue;
      ++comparable;
      if ((pos_a[i] < pos_a[j]) != (pos_b[i] < pos_b[j])) ++discordant;
    }
  }
  if (comparable == 0) return std::nullopt;
  return static_cast<double>(discordant) / static_cast<double>(comparable);
}

AlignmentReport alignment_report(std::span<const QuestionRecord> records,
                                 const MeasureTable& table, const AlignmentConfig& cfg) {
  if (table.question_ids.size() != records.size()) {
    throw LengthError("alignment_report: measure table and records differ in size");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (table.question_ids[i] != records[i].question_id) {
      throw ValidationError("alignment_report: row " + std::to_string(i) + " is " +
                            table.question_ids[i] + " in the measure table but " +
                            records[i].question_id + " in the records");
    }
  }

  AlignmentReport report;
  report.config = cfg;
  if (!records.empty()) {
    report.model_id = records.front().model_id;
    report.dataset_id = records.front().dataset_id;
  }
  report.agreement = agreement(records);

  std::vector<double> human_h;
  std::vector<double> distances;
  human_h.reserve(records.size());
  for (const auto& r : records) {
    human_h.push_back(human_entropy(*r.human_ratios));
    const auto d =
        kendall_distance(preference_order(r.choice_probs), preference_order(*r.human_ratios));
    if (d) distances.push_back(*d);
  }
  report.kendall_n = distances.size();
  if (!distances.empty()) {
    const double n = static_cast<double>(distances.size());
    const double mean = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : distances) ss += (d - mean) * (d - mean);
    report.kendall_mean = mean;
    report.kendall_std = std::sqrt(ss / n);
  }

  for (const auto& column : table.columns) {
    MeasureCorrelation mc;
    mc.measure = column.name;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!column.values[i]) continue;
      xs.push_back(human_h[i]);
      ys.push_back(*column.values[i]);
    }
    mc.n = xs.size();
    try {
      mc.r = cfg.method == CorrelationMethod::pearson ? pearson(xs, ys) : spearman(xs, ys);
    } catch (const DegenerateError&) {
      mc.r = std::nullopt;
    } catch (const LengthError&) {
      mc.r = std::nullopt;
    }
    if (mc.r) {
      mc.above_threshold = std::abs(*mc.r) >= cfg.significance_threshold;
      mc.top_performing = std::abs(*mc.r) >= cfg.top_threshold;
    }
    report.correlations.push_back(std::move(mc));
  }
  return report;
}

std::vector<std::string> top_performing_in_all(std::span<const AlignmentReport> reports) {
  std::vector<std::string> out;
  if (reports.empty()) return out;
  for (const auto& candidate : reports.front().correlations) {
    const bool everywhere = std::all_of(reports.begin(), reports.end(), [&](const auto& rep) {
      return std::any_of(rep.correlations.begin(), rep.correlations.end(), [&](const auto& c) {
        return c.measure == candidate.measure && c.top_performing;
      });
    });
    if (everywhere) out.push_back(candidate.measure);
  }
  return out;
}

}  // namespace uqalign
