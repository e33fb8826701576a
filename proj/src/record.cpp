#include "uqalign/record.hpp"

namespace uqalign {

std::string choice_label(std::size_t index) {
  return std::string(1, static_cast<char>('A' + index));
}

std::optional<std::size_t> choice_index(const std::string& label) {
  if (label.size() != 1 || label[0] < 'A' || label[0] > 'Z') return std::nullopt;
  return static_cast<std::size_t>(label[0] - 'A');
}

std::size_t argmax_first(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace uqalign
