#pragma once

#include <string>
#include <vector>

namespace smatch::verify {

inline constexpr int kNumCriteria = 10;

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  int threads = 0;
};

// Runs one reproduction criterion (1..10) with its pinned grids, seeds, and
// tolerances.
CheckResult run_criterion(int criterion, const Options& opts = {});

// Suite names accepted by `verify`: oracles, invariants, exponents-fast,
// exponents-full, capacity, all.
std::vector<std::string> suite_names();
std::vector<int> suite_criteria(const std::string& suite);
std::vector<CheckResult> run_suite(const std::string& suite,
                                   const Options& opts = {});

}  // namespace smatch::verify
