#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uqalign/core_dist.hpp"

namespace uqalign {

inline constexpr std::size_t kMaxChoices = 26;

// "A" for 0, "B" for 1, ...
std::string choice_label(std::size_t index);
// Inverse of choice_label; nullopt for anything but a single capital letter.
std::optional<std::size_t> choice_index(const std::string& label);

// One prompt instance as dumped by the extractor: next-token distribution after
// "Answer: ", the answer-label probabilities and the cloze-test choice.
struct QuestionRecord {
  std::string question_id;
  std::string model_id;
  std::string dataset_id;
  TokenDistribution dist;
  // Decoded text per listed token id.
  std::map<std::int64_t, std::string> token_text;
  // Probability of label "A", "B", ... in order; size is the choice count.
  std::vector<double> choice_probs;
  std::size_t chosen = 0;
  std::optional<std::size_t> correct;
  std::optional<std::string> subject;
  // Human response shares per choice, same order as choice_probs.
  std::optional<std::vector<double>> human_ratios;
  // Producer-side audit data (e.g. the answer-order permutation), compact JSON object.
  std::optional<std::string> metadata;

  std::size_t choice_count() const { return choice_probs.size(); }
  bool is_correct() const { return correct && *correct == chosen; }

  friend bool operator==(const QuestionRecord&, const QuestionRecord&) = default;
};

// Index of the largest value; ties go to the lowest index.
std::size_t argmax_first(const std::vector<double>& values);

}  // namespace uqalign
