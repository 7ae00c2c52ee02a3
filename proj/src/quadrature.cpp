// SPDX-License-Identifier: MIT
#include "semiboost/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace semiboost {

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double recurse(const std::function<double(double)>& f, double a, double fa, double b, double fb,
               double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(f, a, fa, m, fm, flm);
  const double right = simpson(f, m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0) throw std::runtime_error("adaptive quadrature failed to converge");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  return recurse(f, a, fa, b, fb, m, fm, simpson(f, a, fa, b, fb, fm), tol, 48);
}

}  // namespace semiboost
