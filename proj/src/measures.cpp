#include "uqalign/measures.hpp"

#include <cmath>
#include <cstdio>

#include "uqalign/errors.hpp"
#include "uqalign/statkit.hpp"

namespace uqalign {

void MeasureConfig::validate() const {
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] == 0) throw RangeError("k values must be positive");
    if (i > 0 && k_values[i] <= k_values[i - 1]) {
      throw RangeError("k values must be strictly increasing");
    }
  }
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(p_values[i] > 0.0 && p_values[i] < 1.0)) {
      throw RangeError("p values must lie in (0,1)");
    }
    if (i > 0 && p_values[i] >= p_values[i - 1]) {
      throw RangeError("p values must be strictly decreasing");
    }
  }
}

double top1(const TokenDistribution& dist) {
  if (dist.entries.empty()) throw EmptyError("top1: distribution has no listed tokens");
  return dist.entries.front().prob;
}

double total_entropy(const TokenDistribution& dist) {
  if (dist.exact_total_entropy) return *dist.exact_total_entropy;

  // Normalize by the recorded mass so an untruncated dump matches top-k at k=|V|.
  const double listed = dist.listed_mass();
  const double mass = listed + (dist.tail_count > 0 ? dist.tail_mass : 0.0);
  if (!(mass > 0.0)) throw DegenerateError("total_entropy: zero probability mass");
  double h = 0.0;
  for (const auto& e : dist.entries) {
    const double q = e.prob / mass;
    if (q > 0.0) h -= q * std::log(q);
  }
  if (dist.tail_count > 0 && dist.tail_mass > 0.0) {
    const double q = dist.tail_mass / mass;
    h -= q * std::log(q / static_cast<double>(dist.tail_count));
  }
  return h > 0.0 ? h : 0.0;
}

double choice_entropy(std::span<const double> label_probs) {
  if (label_probs.size() < 2 || label_probs.size() > kMaxChoices) {
    throw RangeError("choice_entropy needs between 2 and 26 labels, got " +
                     std::to_string(label_probs.size()));
  }
  return shannon_entropy(renormalize(label_probs));
}

double top_k_entropy(const TokenDistribution& dist, std::size_t k) {
  return shannon_entropy(top_k_subset(dist, k));
}

double top_p_entropy(const TokenDistribution& dist, double p, NucleusMode mode) {
  return shannon_entropy(top_p_set(dist, p, mode));
}

std::size_t top_p_size(const TokenDistribution& dist, double p, NucleusMode mode) {
  return top_p_set(dist, p, mode).source_size;
}

std::string format_parameter(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", value);
  return buf;
}

namespace {

template <typename T, typename Fn>
std::optional<T> guarded(TruncationPolicy policy, const std::string& question,
                         const std::string& parameter, Fn&& fn) {
  try {
    return fn();
  } catch (const TruncationError& e) {
    if (policy == TruncationPolicy::null_cell) return std::nullopt;
    throw TruncationError("question " + question + ": " + e.what() + " [" + parameter + "]",
                          parameter);
  }
}

}  // namespace

MeasureVector compute_measures(const QuestionRecord& record, const MeasureConfig& cfg,
                               TruncationPolicy policy) {
  MeasureVector mv;
  mv.question_id = record.question_id;
  mv.top1_prob = top1(record.dist);
  mv.total_entropy = total_entropy(record.dist);
  mv.choice_entropy = choice_entropy(record.choice_probs);

  mv.top_k_entropy.reserve(cfg.k_values.size());
  for (std::size_t k : cfg.k_values) {
    const std::string param = "k=" + std::to_string(k);
    mv.top_k_entropy.emplace_back(
        k, guarded<double>(policy, record.question_id, param, [&] { return top_k_entropy(record.dist, k); }));
  }
  mv.top_p_entropy.reserve(cfg.p_values.size());
  mv.top_p_size.reserve(cfg.p_values.size());
  for (double p : cfg.p_values) {
    const std::string param = "p=" + format_parameter(p);
    std::optional<NormalizedSubset> set = guarded<NormalizedSubset>(
        policy, record.question_id, param, [&] { return top_p_set(record.dist, p, cfg.nucleus_mode); });
    if (set) {
      mv.top_p_entropy.emplace_back(p, shannon_entropy(*set));
      mv.top_p_size.emplace_back(p, set->source_size);
    } else {
      mv.top_p_entropy.emplace_back(p, std::nullopt);
      mv.top_p_size.emplace_back(p, std::nullopt);
    }
  }
  return mv;
}

const MeasureColumn* MeasureTable::find(const std::string& name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<std::string> measure_names(const MeasureConfig& cfg) {
  std::vector<std::string> names{"top1", "total_entropy", "choice_entropy"};
  for (std::size_t k : cfg.k_values) names.push_back("top_k_entropy_" + std::to_string(k));
  for (double p : cfg.p_values) names.push_back("top_p_entropy_" + format_parameter(p));
  for (double p : cfg.p_values) names.push_back("top_p_size_" + format_parameter(p));
  return names;
}

MeasureTable tabulate(std::span<const MeasureVector> vectors) {
  MeasureTable table;
  if (vectors.empty()) return table;

  const auto& first = vectors.front();
  auto add = [&](std::string name, Orientation o) {
    table.columns.push_back({std::move(name), o, {}});
    table.columns.back().values.reserve(vectors.size());
  };
  add("top1", Orientation::certainty);
  add("total_entropy", Orientation::uncertainty);
  add("choice_entropy", Orientation::uncertainty);
  for (const auto& [k, _] : first.top_k_entropy) {
    add("top_k_entropy_" + std::to_string(k), Orientation::uncertainty);
  }
  for (const auto& [p, _] : first.top_p_entropy) {
    add("top_p_entropy_" + format_parameter(p), Orientation::uncertainty);
  }
  for (const auto& [p, _] : first.top_p_size) {
    add("top_p_size_" + format_parameter(p), Orientation::uncertainty);
  }

  for (const auto& mv : vectors) {
    if (mv.top_k_entropy.size() != first.top_k_entropy.size() ||
        mv.top_p_entropy.size() != first.top_p_entropy.size()) {
      throw LengthError("tabulate: measure vectors were computed with different configs");
    }
    table.question_ids.push_back(mv.question_id);
    std::size_t c = 0;
    table.columns[c++].values.emplace_back(mv.top1_prob);
    table.columns[c++].values.emplace_back(mv.total_entropy);
    table.columns[c++].values.emplace_back(mv.choice_entropy);
    for (const auto& [_, v] : mv.top_k_entropy) table.columns[c++].values.push_back(v);
    for (const auto& [_, v] : mv.top_p_entropy) table.columns[c++].values.push_back(v);
    for (const auto& [_, v] : mv.top_p_size) {
      table.columns[c++].values.push_back(v ? std::optional<double>(static_cast<double>(*v))
                                            : std::nullopt);
    }
  }
  return table;
}

}  // namespace uqalign
