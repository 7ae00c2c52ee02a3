// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "semiboost/order_params.hpp"

namespace semiboost {

enum class AtomKind {
  base,     ///< scheme transition over [s, t] at `level`
  boosted,  ///< boosted one-step transition of target order `order`
  exact     ///< exact semigroup over the same span
};

/// One operator over a span of the level-`level` grid, addressed by
/// integer grid indices so that alignment is exact by construction.
/// A span with s == t is the identity.
struct OperatorAtom {
  AtomKind kind = AtomKind::base;
  int order = 0;  ///< boosted atoms only
  int level = 0;
  std::int64_t s = 0;
  std::int64_t t = 0;
};

struct SignedAtom {
  int sign = 1;  ///< +1 or -1
  OperatorAtom atom;
};

/// One composition factor: a signed sum of atoms.  Difference factors
/// carry two entries; plain factors one.
using Factor = std::vector<SignedAtom>;

/// A signed product of factors.  Factors compose earliest-span-first, so
/// under the matrix backend the leftmost factor is the earliest in time.
struct ExpansionTerm {
  int sign = 1;
  std::vector<Factor> factors;
  /// Interior correction indices t_1 < ... < t_i on the fine grid; empty
  /// for the base term.  Kept for stratified evaluation and display.
  std::vector<std::int64_t> grid_times;
};

/// Terms of the boosted one-step operator of order p.nu over the step
/// [s, s+1] of the level-`level` grid: one all-base fine path plus, for
/// every correction stratum i and every i-tuple of interior fine indices,
/// a product with i (boosted - base) difference factors over single fine
/// steps.  Boosted atoms have order q_order(i, level, p.nu, p.alpha) and
/// are recursively expandable until their stage count reaches one.
std::vector<ExpansionTerm> build_expansion(const OrderParams& p, int level, std::int64_t s);

/// Telescoping of the exact one-step semigroup against the fine scheme.
struct ProofDecomposition {
  std::vector<ExpansionTerm> base;
  std::vector<std::vector<ExpansionTerm>> corrections;  ///< stratum i = 1..m-1
  std::vector<ExpansionTerm> remainder;                 ///< m difference factors, exact tail

  std::vector<ExpansionTerm> all() const;
};

/// Exact identity: base + corrections + remainder equals the exact
/// transition over the step, for any stage count m >= 1.  Correction
/// difference factors are (exact - base) over one fine step with an
/// all-base tail; remainder terms close with the exact flow.
ProofDecomposition build_proof_decomposition(const OrderParams& p, int level, std::int64_t s);

/// Multiply out all difference factors: each input term becomes one
/// signed single-atom-factor word per choice of entry in each factor.
std::vector<ExpansionTerm> expand_to_words(const std::vector<ExpansionTerm>& terms);

/// Enumerate k-element subsets of {1..n} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace semiboost
