#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "minid/verify.hpp"

namespace minid::cli {

struct CriterionResult {
  int id = 0;
  std::string name;
  CheckStatus status = CheckStatus::inconclusive;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::vector<CheckReport> checks;

  bool passed() const noexcept { return status == CheckStatus::pass; }
  std::string summary_line() const;
  std::string to_json() const;
};

struct SuiteOptions {
  std::uint64_t seed = 20230901;
  unsigned threads = 1;
  // Executable used by the determinism criterion to run `sample`.
  std::string cli_path;
  // Criterion ids to run; empty runs all.
  std::vector<int> only;
};

inline constexpr int kCoreCriteria = 11;

// Runs the core acceptance criteria in order; `on_result` sees each result as
// soon as it is available.
std::vector<CriterionResult> run_core_suite(const SuiteOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

}  // namespace minid::cli
