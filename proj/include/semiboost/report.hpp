// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

namespace semiboost {

/// One entry of a convergence study at fine-step count n.
struct StudyRow {
  std::int64_t n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double exact = 0.0;
  double abs_error = 0.0;
  /// stderr < abs_error / 2: the error is resolved above the noise floor.
  bool usable = false;
  double work_per_sample = 0.0;
  std::uint64_t samples = 0;
};

struct SlopeFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  /// Standard error of the fitted coefficient; NaN below 3 rows.
  double ci = std::numeric_limits<double>::quiet_NaN();
};

/// Least-squares fit of log(error) against log(n), sign flipped so that an
/// order-nu decay reads slope ~ nu.  Rows are (n, error) pairs; needs at
/// least two rows with distinct n and positive errors.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& rows);

/// Study outcome with rows sorted by n.  The slope is fitted on usable
/// rows only; with fewer than two of them it stays NaN and the report is
/// flagged noise-dominated.
struct ConvergenceReport {
  std::vector<StudyRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_ci = std::numeric_limits<double>::quiet_NaN();
  bool noise_dominated = false;
};

/// Sorts rows by n and refits slope/slope_ci from the usable rows.
void finalize_report(ConvergenceReport& report);

}  // namespace semiboost
