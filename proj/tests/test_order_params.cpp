// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <stdexcept>

#include "semiboost/order_params.hpp"

using namespace semiboost;

TEST_SUITE_BEGIN("order-params");

TEST_CASE("grid step, indexing and refinement") {
  GridSpec g{1.0, 4, 1};
  g.validate();
  CHECK(g.step() == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.step_count() == 4);
  CHECK(g.time_of(3) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(g.index_of(0.75) == 3);
  CHECK(g.index_of(0.0) == 0);
  CHECK(g.index_of(1.0) == 4);
  CHECK_THROWS_AS(g.index_of(0.3), std::invalid_argument);
  CHECK_THROWS_AS(g.index_of(-0.25), std::invalid_argument);

  GridSpec f = g.refined();
  CHECK(f.level == 2);
  CHECK(f.step_count() == 16);
  CHECK(f.step() == doctest::Approx(g.step() / 4).epsilon(1e-15));

  CHECK_THROWS_AS((GridSpec{0.0, 2, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{1.0, 1, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GridSpec{1.0, 2, -1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS(checked_pow(10, 40), std::overflow_error);
}

TEST_CASE("stage counts") {
  CHECK(m_steps(0, 2, 1) == 2);
  CHECK(m_steps(1, 3, 1) == 1);
  CHECK(m_steps(0, 0, 1) == 0);
  CHECK(m_steps(0, 1, 1) == 1);
  CHECK(m_steps(0, 4, 1) == 4);
  CHECK(m_steps(1, 4, 1) == 2);
  CHECK(m_steps(2, 5, 1) == 1);
  CHECK(m_steps(0, 3, 2) == 2);

  // zero exactly when the target order is zero
  for (int l = 0; l <= 3; ++l)
    for (int nu = 0; nu <= 6; ++nu)
      for (int alpha = 1; alpha <= 2; ++alpha)
        CHECK((m_steps(l, nu, alpha) == 0) == (nu == 0));

  CHECK_THROWS_AS(m_steps(0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(m_steps(-1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(m_steps(0, -1, 1), std::invalid_argument);
}

TEST_CASE("correction orders") {
  CHECK(q_order(1, 0, 3, 1) == 4);
  CHECK(q_order(2, 0, 3, 1) == 3);
  CHECK(q_order(3, 0, 4, 1) == 3);
  CHECK(q_order(1, 0, 2, 1) == 3);
  CHECK(q_order(1, 1, 4, 1) == 5);

  // i restricted to [1, m-1]
  CHECK_THROWS_AS(q_order(0, 0, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(q_order(3, 0, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(q_order(1, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("derivative budgets") {
  CHECK(kappa(1, 3, 1, 2) == 2);
  CHECK(kappa(0, 2, 1, 2) == 4);
  CHECK(kappa(0, 0, 1, 2) == 0);
  CHECK(kappa(2, 0, 2, 3) == 0);
  CHECK(kappa(0, 1, 1, 3) == 3);

  CHECK_THROWS_AS(kappa(0, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(kappa(0, 1, 0, 1), std::invalid_argument);
}

TEST_CASE("level cap") {
  CHECK(l_max(2, 1) == 2);
  CHECK(l_max(3, 2) == 2);
  CHECK(l_max(0, 1) == 0);
  CHECK(l_max(3, 1) == 3);
  CHECK(l_max(6, 2) == 3);
}

TEST_CASE("total derivative order") {
  CHECK(q_nu(2, 1, 2) == 4);
  CHECK(q_nu(1, 1, 2) == 2);
  CHECK(q_nu(1, 1, 1) == 1);
  CHECK_THROWS_AS(q_nu(0, 1, 1), std::invalid_argument);
}

TEST_CASE("earliest evaluation time") {
  OrderParams p;
  p.alpha = 1;
  p.beta = 1;

  p.nu = 2;  // m = 2
  p.grid = GridSpec{1.0, 4, 0};
  CHECK(t_nu(p) == doctest::Approx(0.25).epsilon(1e-15));

  p.nu = 1;  // m = 1
  p.grid = GridSpec{1.0, 100, 0};
  CHECK(t_nu(p) == doctest::Approx(0.50).epsilon(1e-15));

  p.nu = 0;  // m = 0
  p.grid = GridSpec{2.0, 2, 0};
  CHECK(t_nu(p) == doctest::Approx(2.0).epsilon(1e-15));

  p.nu = 2;  // m = 2 == n: too coarse
  p.grid = GridSpec{1.0, 2, 0};
  CHECK_THROWS_WITH_AS(t_nu(p), doctest::Contains("grid too coarse"), std::invalid_argument);
}

// Exhaustive enumeration over the tested parameter range: the correction
// order strictly drops relative to the termination bound and the budget
// recursion stays finite with and without memoization.
TEST_CASE("recursion terminates and memoization is exact") {
  for (int nu = 0; nu <= 6; ++nu)
    for (int alpha = 1; alpha <= 2; ++alpha) {
      const int cap = l_max(nu, alpha);
      for (int l = 0; l <= cap; ++l) {
        const int m = m_steps(l, nu, alpha);
        for (int i = 1; i <= m - 1; ++i)
          CHECK(q_order(i, l, nu, alpha) < nu + i * alpha * std::max(cap, 1));
      }
      for (int beta = 1; beta <= 3; ++beta)
        for (int l = 0; l <= cap; ++l)
          CHECK(kappa(l, nu, alpha, beta) == kappa_unmemoized(l, nu, alpha, beta));
    }
}

TEST_CASE("parameter table covers all levels") {
  OrderParams p;
  p.alpha = 1;
  p.beta = 2;
  p.nu = 3;
  p.grid = GridSpec{1.0, 4, 0};
  const auto rows = build_order_table(p);
  REQUIRE(rows.size() == 4);  // levels 0..3
  CHECK(rows[0].m == 3);
  CHECK(rows[0].q == std::vector<int>{4, 3});
  CHECK(rows[1].m == 1);
  CHECK(rows[1].q.empty());
  CHECK(rows[3].level == 3);
}

TEST_SUITE_END();
