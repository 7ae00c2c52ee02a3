// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>

namespace semiboost {

/// Uniform time grid {k * T / n^level : k = 0, ..., n^level} on [0, T].
///
/// A GridSpec names one level of a nested family: level 0 is the coarse
/// grid with a single step of size T, level l refines each step of level
/// l-1 into `refinement` equal pieces.
struct GridSpec {
  double horizon = 1.0;  ///< T > 0
  int refinement = 2;    ///< n >= 2, sub-steps per step of the parent level
  int level = 0;         ///< l >= 0

  void validate() const;

  /// Step size T / n^level.
  double step() const;

  /// Number of steps n^level (grid has step_count() + 1 points).
  std::int64_t step_count() const;

  /// Time of grid index k; valid for 0 <= k <= step_count().
  double time_of(std::int64_t k) const;

  /// Inverse of time_of; throws std::invalid_argument when t is not a
  /// grid point (relative tolerance 1e-9 of one step).
  std::int64_t index_of(double t) const;

  /// Same family, one level finer.
  GridSpec refined() const;

  /// Same family at an arbitrary level.
  GridSpec at_level(int l) const;
};

/// base^exp for non-negative integers with overflow detection.
std::int64_t checked_pow(std::int64_t base, int exp);

}  // namespace semiboost
