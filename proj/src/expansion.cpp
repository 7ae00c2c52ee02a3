// SPDX-License-Identifier: MIT
#include "semiboost/expansion.hpp"

#include <stdexcept>
#include <string>

namespace semiboost {

namespace {

void check_step(const OrderParams& p, int level, std::int64_t s) {
  p.validate();
  const GridSpec g = p.grid.at_level(level);
  if (s < 0 || s + 1 > g.step_count())
    throw std::invalid_argument("step index " + std::to_string(s) +
                                " not on the level-" + std::to_string(level) + " grid");
}

OperatorAtom base_atom(int level, std::int64_t s, std::int64_t t) {
  return {AtomKind::base, 0, level, s, t};
}

// Shared skeleton of the boosted expansion and the exact telescoping: a
// term for the interior tuple `times` (absolute fine indices) with the
// given difference factor at each tuple point and the given tail kind.
ExpansionTerm tuple_term(int fine, std::int64_t lo, std::int64_t hi,
                         const std::vector<std::int64_t>& times,
                         const Factor& diff_template, AtomKind tail) {
  ExpansionTerm term;
  term.grid_times = times;
  std::int64_t prev = lo;
  for (std::int64_t t : times) {
    term.factors.push_back({{1, base_atom(fine, prev, t - 1)}});
    Factor diff = diff_template;
    for (auto& e : diff) {
      e.atom.level = fine;
      e.atom.s = t - 1;
      e.atom.t = t;
    }
    term.factors.push_back(std::move(diff));
    prev = t;
  }
  term.factors.push_back({{1, {tail, 0, fine, prev, hi}}});
  return term;
}

}  // namespace

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(k);
  for (int j = 0; j < k; ++j) c[j] = j + 1;
  while (true) {
    out.push_back(c);
    int j = k - 1;
    while (j >= 0 && c[j] == n - k + j + 1) --j;
    if (j < 0) break;
    ++c[j];
    for (int r = j + 1; r < k; ++r) c[r] = c[r - 1] + 1;
  }
  return out;
}

std::vector<ExpansionTerm> build_expansion(const OrderParams& p, int level, std::int64_t s) {
  check_step(p, level, s);
  const int fine = level + 1;
  const int n = p.grid.refinement;
  const std::int64_t lo = s * n;
  const std::int64_t hi = lo + n;
  const int m = m_steps(level, p.nu, p.alpha);

  std::vector<ExpansionTerm> terms;
  terms.push_back({1, {{{1, base_atom(fine, lo, hi)}}}, {}});
  for (int i = 1; i <= m - 1; ++i) {
    const int q = q_order(i, level, p.nu, p.alpha);
    const Factor diff = {{1, {AtomKind::boosted, q, fine, 0, 0}},
                         {-1, {AtomKind::base, 0, fine, 0, 0}}};
    for (const auto& combo : combinations(n, i)) {
      std::vector<std::int64_t> times;
      times.reserve(combo.size());
      for (int c : combo) times.push_back(lo + c);
      terms.push_back(tuple_term(fine, lo, hi, times, diff, AtomKind::base));
    }
  }
  return terms;
}

ProofDecomposition build_proof_decomposition(const OrderParams& p, int level, std::int64_t s) {
  check_step(p, level, s);
  const int m = m_steps(level, p.nu, p.alpha);
  if (m < 1)
    throw std::invalid_argument("telescoping needs at least one stage (nu >= 1)");
  const int fine = level + 1;
  const int n = p.grid.refinement;
  const std::int64_t lo = s * n;
  const std::int64_t hi = lo + n;
  const Factor diff = {{1, {AtomKind::exact, 0, fine, 0, 0}},
                       {-1, {AtomKind::base, 0, fine, 0, 0}}};

  ProofDecomposition d;
  d.base.push_back({1, {{{1, base_atom(fine, lo, hi)}}}, {}});
  for (int i = 1; i <= m; ++i) {
    std::vector<ExpansionTerm> group;
    const AtomKind tail = (i == m) ? AtomKind::exact : AtomKind::base;
    for (const auto& combo : combinations(n, i)) {
      std::vector<std::int64_t> times;
      times.reserve(combo.size());
      for (int c : combo) times.push_back(lo + c);
      group.push_back(tuple_term(fine, lo, hi, times, diff, tail));
    }
    if (i == m)
      d.remainder = std::move(group);
    else
      d.corrections.push_back(std::move(group));
  }
  return d;
}

std::vector<ExpansionTerm> ProofDecomposition::all() const {
  std::vector<ExpansionTerm> out = base;
  for (const auto& g : corrections) out.insert(out.end(), g.begin(), g.end());
  out.insert(out.end(), remainder.begin(), remainder.end());
  return out;
}

std::vector<ExpansionTerm> expand_to_words(const std::vector<ExpansionTerm>& terms) {
  std::vector<ExpansionTerm> words;
  for (const auto& term : terms) {
    std::vector<ExpansionTerm> partial;
    partial.push_back({term.sign, {}, term.grid_times});
    for (const auto& factor : term.factors) {
      std::vector<ExpansionTerm> next;
      for (const auto& w : partial)
        for (const auto& entry : factor) {
          ExpansionTerm e = w;
          e.sign *= entry.sign;
          e.factors.push_back({{1, entry.atom}});
          next.push_back(std::move(e));
        }
      partial = std::move(next);
    }
    words.insert(words.end(), partial.begin(), partial.end());
  }
  return words;
}

}  // namespace semiboost
