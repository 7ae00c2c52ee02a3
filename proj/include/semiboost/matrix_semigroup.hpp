// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "semiboost/expansion.hpp"
#include "semiboost/order_params.hpp"

namespace semiboost {

/// Finite-state Markov semigroup exp(tA) used as the exactly computable
/// backend: A has zero row sums and non-negative off-diagonal entries,
/// and the Euler step I + delta * A is a stochastic matrix whenever
/// delta * max|A_ii| <= 1.
struct MatrixSemigroup {
  Eigen::MatrixXd generator;

  void validate() const;
  int states() const { return static_cast<int>(generator.rows()); }
};

/// exp(M) by scaling to infinity-norm <= 1/2, a degree-30 Taylor sum and
/// repeated squaring.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m);

/// Exact transition exp(t * A).
Eigen::MatrixXd exact_transition(const MatrixSemigroup& sg, double t);

/// One Euler step I + delta * A; rejects delta * max|A_ii| > 1.
Eigen::MatrixXd base_step(const MatrixSemigroup& sg, double delta);

/// Largest distance between matching rows in L1 norm; for stochastic
/// matrices this is twice the worst-case total variation over initial
/// states.
double tv_distance(const Eigen::MatrixXd& p1, const Eigen::MatrixXd& p2);

/// Evaluates expansion terms exactly on the matrix backend.  Boosted
/// atoms are expanded recursively; one-step boosted matrices and Euler
/// steps are memoized per (order, level) since the family is
/// time-homogeneous.
class MatrixExpansionEvaluator {
 public:
  MatrixExpansionEvaluator(MatrixSemigroup sg, OrderParams params);

  Eigen::MatrixXd atom_matrix(const OperatorAtom& a);
  Eigen::MatrixXd evaluate(const std::vector<ExpansionTerm>& terms);

  /// Boosted one-step transition of the given target order on the
  /// level-`level` grid.
  const Eigen::MatrixXd& boosted_step(int order, int level);

 private:
  const Eigen::MatrixXd& base_one(int level);

  MatrixSemigroup sg_;
  OrderParams params_;
  int depth_ = 0;
  std::map<int, Eigen::MatrixXd> base_memo_;
  std::map<std::pair<int, int>, Eigen::MatrixXd> boosted_memo_;
};

/// Full-horizon boosted transition matrix: the level-0 single step [0, T].
Eigen::MatrixXd boosted_transition(const MatrixSemigroup& sg, const OrderParams& params);

/// Reproducible generator with off-diagonal entries in
/// [0.05, 1.5/(states-1)], so Euler steps stay stochastic for
/// delta <= horizon/2 with horizon = 1.
MatrixSemigroup random_generator(int states, std::uint64_t seed);

}  // namespace semiboost
