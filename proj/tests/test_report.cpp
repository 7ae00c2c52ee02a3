// SPDX-License-Identifier: MIT
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "doctest.h"
#include "semiboost/report.hpp"
#include "semiboost/rng.hpp"

using namespace semiboost;

TEST_SUITE("report") {

TEST_CASE("exact power laws fit exactly") {
  const SlopeFit one = fit_slope({{2.0, 0.7 / 2.0}, {4.0, 0.7 / 4.0}, {8.0, 0.7 / 8.0}});
  CHECK(std::abs(one.slope - 1.0) < 1e-12);
  CHECK(one.ci == doctest::Approx(0.0).epsilon(1e-10));

  const SlopeFit two = fit_slope({{2.0, 3.0 / 4.0}, {4.0, 3.0 / 16.0}, {8.0, 3.0 / 64.0},
                                  {16.0, 3.0 / 256.0}});
  CHECK(std::abs(two.slope - 2.0) < 1e-12);
}

TEST_CASE("two rows fit a slope but no ci") {
  const SlopeFit f = fit_slope({{2.0, 0.5}, {4.0, 0.125}});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(std::isnan(f.ci));
}

TEST_CASE("one percent noise keeps the slope near two") {
  rng::Stream s = rng::Stream::derive(31, 0);
  std::vector<std::pair<double, double>> rows;
  for (const double n : {2.0, 4.0, 8.0, 16.0})
    rows.push_back({n, (1.0 / (n * n)) * (1.0 + 0.02 * (s.next_uniform() - 0.5))});
  const SlopeFit f = fit_slope(rows);
  CHECK(f.slope > 1.8);
  CHECK(f.slope < 2.2);
  CHECK(f.ci > 0.0);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(fit_slope({{2.0, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{2.0, 0.5}, {4.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{2.0, 0.5}, {4.0, -0.1}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_slope({{2.0, 0.5}, {2.0, 0.25}}), std::invalid_argument);
}

TEST_CASE("finalize fits usable rows only") {
  ConvergenceReport r;
  for (const auto& [n, err, usable] :
       {std::tuple{8, 1.0 / 64.0, true}, std::tuple{2, 1.0 / 4.0, true},
        std::tuple{4, 1.0 / 16.0, true}, std::tuple{16, 0.9, false}}) {
    StudyRow row;
    row.n = n;
    row.abs_error = err;
    row.usable = usable;
    row.work_per_sample = 1.0;
    r.rows.push_back(row);
  }
  finalize_report(r);
  CHECK(r.rows.front().n == 2);  // sorted
  CHECK(r.rows.back().n == 16);
  CHECK_FALSE(r.noise_dominated);
  CHECK(std::abs(r.slope - 2.0) < 1e-12);  // the unusable row does not drag the fit

  ConvergenceReport noisy;
  StudyRow row;
  row.n = 2;
  row.abs_error = 0.1;
  row.usable = false;
  noisy.rows.push_back(row);
  row.n = 4;
  noisy.rows.push_back(row);
  finalize_report(noisy);
  CHECK(noisy.noise_dominated);
  CHECK(std::isnan(noisy.slope));
}

}  // TEST_SUITE
