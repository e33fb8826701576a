#pragma once

#include <string>
#include <vector>

namespace uqalign {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Invariant suite over built-in fixtures; backs `uqalign selfcheck`.
std::vector<CheckResult> run_selfcheck();

}  // namespace uqalign
