// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace semiboost {

/// Monte Carlo estimate with exact work accounting.
struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;           ///< sample standard deviation / sqrt(n_samples)
  std::uint64_t n_samples = 0;
  std::uint64_t work = 0;         ///< elementary scheme steps consumed, exact
};

/// Compensated (Neumaier) accumulator.
struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct SampleResult {
  double value = 0.0;
  std::uint64_t work = 0;
};

/// Runs `sample` for indices 0..n_samples-1 and reduces mean/stderr/work.
///
/// Samples are processed in fixed-size blocks; block partial sums are
/// compensated and combined in block order, so the result is bit-identical
/// for any worker count.  `sample` must be pure given its index (all
/// randomness derived from the index).
MCEstimate run_mc(std::uint64_t n_samples, int workers,
                  const std::function<SampleResult(std::uint64_t)>& sample);

}  // namespace semiboost
