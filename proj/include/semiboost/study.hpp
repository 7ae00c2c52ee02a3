// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace semiboost {

/// Flat key=value study configuration.  Repeated keys form lists; pair
/// order is preserved, so serialize() round-trips losslessly through
/// parse().  Values are stored trimmed.
class StudyConfig {
 public:
  void append(const std::string& key, const std::string& value);
  /// Drops every existing pair with `key`, then appends.
  void replace(const std::string& key, const std::string& value);
  /// Replaces this config's pairs key-by-key with `stronger`'s pairs.
  void override_with(const StudyConfig& stronger);

  bool has(const std::string& key) const;
  /// All values of `key` in insertion order; empty when absent.
  std::vector<std::string> values(const std::string& key) const;
  /// Last value of `key`; throws std::invalid_argument when absent.
  std::string value(const std::string& key) const;
  std::string value_or(const std::string& key, const std::string& fallback) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer_or(const std::string& key, long fallback) const;
  /// Repeated integer key as a list; throws when absent or unparsable.
  std::vector<long> integer_list(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  /// One "key=value" line per pair, insertion order.
  std::string serialize() const;
  /// Inverse of serialize(); '#' comments and blank lines are skipped.
  /// Malformed lines throw std::invalid_argument naming the line.
  static StudyConfig parse(const std::string& text);
  static StudyConfig load_file(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

/// Measured inputs of the regularization condition thresholds.
struct HypothesisInputs {
  double psi_norm = 0.0;     ///< scheme norm of order 3
  double lambda_star = 0.0;  ///< empirical ellipticity floor
  double m_star = 0.0;       ///< splitting mass
  double m8 = 0.0;           ///< eighth noise moment (clamped below by 1)
  int dim = 1;               ///< state dimension N
};

/// Flow-side condition: 3 delta^{1/4} |psi| + delta M8 + exp(-m*^2 t / (2 delta)),
/// to be compared against 1/2.
double flow_condition_lhs(const HypothesisInputs& in, double delta, double t);

/// Ellipticity requirement on delta^{-1/2}: 8 (N^3 + N^2 + 1) / lambda* * |psi|^2.
/// Throws std::invalid_argument when lambda* <= 0 (condition inapplicable).
double ellipticity_requirement(const HypothesisInputs& in);

/// Runs the configured study: prints plain tables to `out`, writes the CSV
/// atomically when an output path is configured, and reports failures on
/// `err`.  Relative output paths resolve against the SEMIBOOST_OUT_DIR
/// environment variable when it is set.
///
/// Exit codes: 0 success, 2 configuration error, 3 numerical invariant
/// violated, 4 I/O failure.
int run_study(const StudyConfig& config, std::ostream& out, std::ostream& err);

}  // namespace semiboost
