#pragma once

#include <string>
#include <vector>

#include "barrons/harness.hpp"

namespace barrons {

struct VerifyIssue {
  int round = 0;  // 0 for summary-level findings
  std::string message;
};

struct VerifyReport {
  int rounds_checked = 0;
  int restarts_checked = 0;
  std::vector<VerifyIssue> issues;
  /// Informational remarks that do not fail verification.
  std::vector<std::string> notes;

  bool ok() const { return issues.empty(); }
};

/// Re-derives everything a trace claims from its plays and market: losses,
/// prefix sums, regret, membership, gradient norms and, for the adaptive
/// learner, alpha, restart decisions, beta halving, epoch bookkeeping,
/// stability ratios and the epoch-count bound.
VerifyReport verify_trace(const ExperimentResult& trace);

}  // namespace barrons
