// SPDX-License-Identifier: MIT
#include "semiboost/order_params.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>

namespace semiboost {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void check_common(int level, int nu, int alpha) {
  if (level < 0) fail("grid level must be >= 0");
  if (nu < 0) fail("target order nu must be >= 0");
  if (alpha < 1) fail("base order alpha must be >= 1");
}

// ceil(a / b) for a >= 0, b > 0.
long ceil_div(long a, long b) { return (a + b - 1) / b; }

constexpr int kMaxRecursionDepth = 64;

long kappa_impl(int level, int nu, int alpha, int beta, int depth,
                std::map<std::tuple<int, int, int, int>, long>* memo) {
  if (depth > kMaxRecursionDepth)
    throw std::runtime_error("kappa recursion exceeded depth bound");
  if (memo) {
    auto it = memo->find({level, nu, alpha, beta});
    if (it != memo->end()) return it->second;
  }
  const int m = m_steps(level, nu, alpha);
  long best = static_cast<long>(beta) * m;
  for (int i = 1; i <= m - 1; ++i) {
    const int q = q_order_formula(i, level, nu, alpha);
    const long inner = i * kappa_impl(level + 1, q, alpha, beta, depth + 1, memo);
    if (inner > best) best = inner;
  }
  if (memo) (*memo)[{level, nu, alpha, beta}] = best;
  return best;
}

}  // namespace

void GridSpec::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("grid horizon must be finite and > 0");
  if (refinement < 2) fail("grid refinement must be >= 2");
  if (level < 0) fail("grid level must be >= 0");
  checked_pow(refinement, level);
}

std::int64_t checked_pow(std::int64_t base, int exp) {
  if (base < 0 || exp < 0) fail("checked_pow expects non-negative arguments");
  std::int64_t r = 1;
  for (int k = 0; k < exp; ++k) {
    if (base != 0 && r > std::numeric_limits<std::int64_t>::max() / base)
      throw std::overflow_error("grid index range overflows 64 bits");
    r *= base;
  }
  return r;
}

double GridSpec::step() const { return horizon / static_cast<double>(step_count()); }

std::int64_t GridSpec::step_count() const { return checked_pow(refinement, level); }

double GridSpec::time_of(std::int64_t k) const {
  if (k < 0 || k > step_count()) fail("grid index out of range");
  return static_cast<double>(k) * step();
}

std::int64_t GridSpec::index_of(double t) const {
  const double h = step();
  const auto k = static_cast<std::int64_t>(std::llround(t / h));
  if (k < 0 || k > step_count() || std::abs(t - static_cast<double>(k) * h) > 1e-9 * h)
    fail("time " + std::to_string(t) + " is not a level-" + std::to_string(level) + " grid point");
  return k;
}

GridSpec GridSpec::refined() const { return at_level(level + 1); }

GridSpec GridSpec::at_level(int l) const {
  GridSpec g{horizon, refinement, l};
  g.validate();
  return g;
}

void OrderParams::validate() const {
  if (alpha < 1) fail("base order alpha must be >= 1");
  if (beta < 1) fail("derivative cost beta must be >= 1");
  if (nu < 0) fail("target order nu must be >= 0");
  grid.validate();
}

int m_steps(int level, int nu, int alpha) {
  check_common(level, nu, alpha);
  const long denom = static_cast<long>(1 + alpha) * level + alpha;
  return static_cast<int>(ceil_div(nu, denom));
}

int q_order_formula(int i, int level, int nu, int alpha) {
  check_common(level, nu, alpha);
  // ceil of an integer argument: nu + i - (1 + alpha) * (level + 1) * (i - 1).
  const long q = static_cast<long>(nu) + i -
                 static_cast<long>(1 + alpha) * (level + 1) * (i - 1);
  if (q < 1) throw std::runtime_error("correction order dropped below 1");
  return static_cast<int>(q);
}

int q_order(int i, int level, int nu, int alpha) {
  const int m = m_steps(level, nu, alpha);
  if (i < 1 || i > m - 1)
    fail("correction index " + std::to_string(i) + " outside [1, " + std::to_string(m - 1) + "]");
  return q_order_formula(i, level, nu, alpha);
}

long kappa(int level, int nu, int alpha, int beta) {
  if (beta < 1) fail("derivative cost beta must be >= 1");
  check_common(level, nu, alpha);
  thread_local std::map<std::tuple<int, int, int, int>, long> memo;
  return kappa_impl(level, nu, alpha, beta, 0, &memo);
}

long kappa_unmemoized(int level, int nu, int alpha, int beta) {
  if (beta < 1) fail("derivative cost beta must be >= 1");
  check_common(level, nu, alpha);
  return kappa_impl(level, nu, alpha, beta, 0, nullptr);
}

int l_max(int nu, int alpha) {
  check_common(0, nu, alpha);
  return static_cast<int>(ceil_div(nu, alpha));
}

long q_nu(int nu, int alpha, int beta) {
  if (nu < 1) fail("q_nu requires target order nu >= 1");
  if (beta < 1) fail("derivative cost beta must be >= 1");
  check_common(0, nu, alpha);
  const int m0 = m_steps(0, nu, alpha);
  long best = 0;
  // The outer max runs one index past the stratum range, hence the
  // unchecked formula.
  for (int i = 1; i <= m0; ++i) {
    const int q = q_order_formula(i, 0, nu, alpha);
    const long k = kappa(1, q, alpha, beta);
    const long cand = i * std::max<long>(beta, k);
    if (cand > best) best = cand;
  }
  return best;
}

double t_nu(const OrderParams& p) {
  p.validate();
  const int m = m_steps(0, p.nu, p.alpha);
  const long n = p.grid.refinement;
  if (n <= m)
    fail("grid too coarse for order " + std::to_string(p.nu) +
         ": need refinement > " + std::to_string(m));
  const long k = ceil_div(n - m, m + 1);
  return static_cast<double>(k) * p.grid.horizon / static_cast<double>(n);
}

std::vector<OrderTableRow> build_order_table(const OrderParams& p) {
  p.validate();
  std::vector<OrderTableRow> rows;
  const int cap = l_max(p.nu, p.alpha);
  for (int l = 0; l <= cap; ++l) {
    OrderTableRow row;
    row.level = l;
    row.m = m_steps(l, p.nu, p.alpha);
    row.kappa_value = kappa(l, p.nu, p.alpha, p.beta);
    for (int i = 1; i <= row.m - 1; ++i) row.q.push_back(q_order(i, l, p.nu, p.alpha));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace semiboost
