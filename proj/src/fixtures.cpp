#include "uqalign/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "uqalign/rng.hpp"

namespace uqalign::fixtures {

namespace {

constexpr std::int64_t kLabelTokenBase = 330;  // " A" .. " Z"
constexpr std::int64_t kFillerTokenBase = 1000;

std::string qid(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "q%05zu", i);
  return buf;
}

// Label probabilities with `chosen` on top holding `top_share`.
std::vector<double> peaked(std::size_t labels, std::size_t chosen, double top_share, Rng& rng) {
  std::vector<double> w(labels, 0.0);
  double rest = 0.0;
  for (std::size_t j = 0; j < labels; ++j) {
    if (j == chosen) continue;
    w[j] = 0.85 + 0.3 * rng.uniform01();
    rest += w[j];
  }
  for (std::size_t j = 0; j < labels; ++j) {
    w[j] = j == chosen ? top_share : (1.0 - top_share) * w[j] / rest;
  }
  return w;
}

std::vector<double> dirichlet_ones(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log(1.0 - rng.uniform01());
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

}  // namespace

TokenDistribution label_distribution(std::span<const double> choice_probs, double label_mass,
                                     std::size_t fillers, std::uint64_t tail_count) {
  TokenDistribution d;
  constexpr double kTail = 0.02;
  for (std::size_t j = 0; j < choice_probs.size(); ++j) {
    d.entries.push_back({kLabelTokenBase + static_cast<std::int64_t>(j),
                         label_mass * choice_probs[j]});
  }
  const double filler_mass = 1.0 - label_mass - (tail_count > 0 ? kTail : 0.0);
  double norm = 0.0;
  for (std::size_t f = 0; f < fillers; ++f) norm += std::pow(0.96, static_cast<double>(f));
  for (std::size_t f = 0; f < fillers; ++f) {
    d.entries.push_back({kFillerTokenBase + static_cast<std::int64_t>(f),
                         filler_mass * std::pow(0.96, static_cast<double>(f)) / norm});
  }
  d.tail_count = tail_count;
  d.tail_mass = tail_count > 0 ? std::max(0.0, 1.0 - d.listed_mass()) : 0.0;
  return validate(std::move(d));
}

std::vector<QuestionRecord> calibrated(std::uint64_t seed, const CalibratedSpec& spec) {
  const Rng root(seed);
  std::vector<QuestionRecord> out;
  out.reserve(spec.questions);
  for (std::size_t i = 0; i < spec.questions; ++i) {
    Rng rng = root.derive("calibrated", i);
    const bool confident = i % 2 == 0;
    QuestionRecord r;
    r.question_id = qid(i);
    r.model_id = "synthetic-model";
    r.dataset_id = "synthetic-mcq";
    r.subject = "subject_" + std::to_string(i % 4);
    const auto correct = static_cast<std::size_t>(rng.below(spec.labels));
    r.correct = correct;

    const double accuracy = confident ? spec.accuracy_high : spec.accuracy_low;
    std::size_t chosen = correct;
    if (rng.uniform01() >= accuracy) {
      // wrong label, weights halving from "A" onward
      double total = 0.0;
      for (std::size_t j = 0; j < spec.labels; ++j) {
        if (j != correct) total += std::ldexp(1.0, -static_cast<int>(j));
      }
      double u = rng.uniform01() * total;
      for (std::size_t j = 0; j < spec.labels; ++j) {
        if (j == correct) continue;
        chosen = j;
        u -= std::ldexp(1.0, -static_cast<int>(j));
        if (u < 0.0) break;
      }
    }
    const double top_share = confident
                                 ? 0.7 + 0.25 * rng.uniform01()
                                 : (1.25 + 0.3 * rng.uniform01()) / static_cast<double>(spec.labels);
    r.choice_probs = peaked(spec.labels, chosen, top_share, rng);
    r.chosen = argmax_first(r.choice_probs);
    const double label_mass = confident ? 0.9 : 0.5;
    r.dist = label_distribution(r.choice_probs, label_mass, spec.fillers, spec.tail_count);
    for (const auto& e : r.dist.entries) {
      r.token_text[e.token_id] =
          e.token_id < kFillerTokenBase
              ? " " + choice_label(static_cast<std::size_t>(e.token_id - kLabelTokenBase))
              : "tok" + std::to_string(e.token_id);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QuestionRecord> alignment(std::uint64_t seed, const AlignmentSpec& spec) {
  static constexpr std::size_t kCounts[] = {2, 2, 2, 3, 3, 4, 4, 5, 6, 7};
  const Rng root(seed);
  std::vector<QuestionRecord> out;
  out.reserve(spec.questions);
  for (std::size_t i = 0; i < spec.questions; ++i) {
    Rng rng = root.derive("alignment", i);
    const std::size_t n = kCounts[rng.below(std::size(kCounts))];
    QuestionRecord r;
    r.question_id = qid(i);
    r.model_id = "synthetic-model";
    r.dataset_id = "synthetic-survey";
    r.choice_probs = dirichlet_ones(n, rng);
    r.chosen = argmax_first(r.choice_probs);
    const double label_mass = 0.4 + 0.5 * rng.uniform01();
    r.dist = label_distribution(r.choice_probs, label_mass, 120, 20000);
    for (const auto& e : r.dist.entries) r.token_text[e.token_id] = "t" + std::to_string(e.token_id);
    if (spec.human_matches_model) {
      r.human_ratios = r.choice_probs;
    } else {
      auto shares = dirichlet_ones(n, rng);
      for (auto& s : shares) s = std::round(100.0 * s);
      r.human_ratios = shares;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> shuffled(std::span<const double> values, std::uint64_t seed) {
  std::vector<double> out(values.begin(), values.end());
  Rng rng(seed);
  rng.shuffle(std::span<double>(out));
  return out;
}

}  // namespace uqalign::fixtures
