// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "semiboost/grid.hpp"

namespace semiboost {

/// Parameters of the boosted-order construction.
///
/// `alpha` is the weak-error order of the base scheme family, `beta` the
/// derivative cost per base step, `nu` the target order of the boosted
/// approximation, and `grid` the level-0 grid of the nested family.
struct OrderParams {
  int alpha = 1;  ///< >= 1
  int beta = 1;   ///< >= 1
  int nu = 1;     ///< >= 0
  GridSpec grid;

  void validate() const;
};

/// Number of stages m(l, nu) entering the boosted step at grid level l:
/// one base term plus m - 1 correction strata.  Zero iff nu == 0.
int m_steps(int level, int nu, int alpha);

/// Target order of the i-th correction stratum at level l.  Defined for
/// 1 <= i <= m_steps(level, nu, alpha) - 1; throws outside that range.
int q_order(int i, int level, int nu, int alpha);

/// Same formula as q_order without the domain check on i.  Used where the
/// recursion evaluates the formula one index past the stratum range.
int q_order_formula(int i, int level, int nu, int alpha);

/// Derivative budget kappa(l, nu) of the boosted step at level l.
/// Memoized per thread; kappa_unmemoized is the plain recursion.
long kappa(int level, int nu, int alpha, int beta);
long kappa_unmemoized(int level, int nu, int alpha, int beta);

/// Deepest grid level used by the construction for target order nu.
int l_max(int nu, int alpha);

/// Total derivative order required of the test function for target order
/// nu; requires nu >= 1.
long q_nu(int nu, int alpha, int beta);

/// Earliest evaluation time for the total-variation bound: the first
/// point of the level-1 grid at or above T * (n - m) / (n * (m + 1)) with
/// m = m_steps(0, nu, alpha).  Throws when n <= m ("grid too coarse").
double t_nu(const OrderParams& p);

/// One row of the per-level parameter table.
struct OrderTableRow {
  int level = 0;
  int m = 0;
  long kappa_value = 0;
  std::vector<int> q;  ///< q_order(i, level, ...) for i = 1..m-1
};

/// Table of (m, kappa, q_i) for levels 0..l_max(nu, alpha).
std::vector<OrderTableRow> build_order_table(const OrderParams& p);

}  // namespace semiboost
