// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "semiboost/quadrature.hpp"
#include "semiboost/scheme.hpp"

using namespace semiboost;

namespace {

Vec scalar(double v) {
  Vec x(1);
  x[0] = v;
  return x;
}

SchemeSemigroup ou_semigroup(double a, double sigma, int n, double T = 1.0, int level = 1) {
  return SchemeSemigroup{make_ou_scheme(a, sigma), gaussian_noise(1), {}, GridSpec{T, n, level}};
}

std::vector<CloudPoint> fixed_cloud_1d() {
  std::vector<CloudPoint> cloud;
  for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
    for (double d : {0.0, 0.1}) cloud.push_back({0.0, scalar(x), scalar(0.5), d});
  return cloud;
}

}  // namespace

TEST_SUITE_BEGIN("scheme");

TEST_CASE("Euler construction and stepping") {
  // Brownian special case of the Euler map
  auto brown = make_euler(1, 1, [](const Vec& x) { return Vec(Vec::Zero(1)); },
                          [](const Vec&) { return Eigen::MatrixXd::Identity(1, 1); });
  CHECK(brown.psi(0.0, scalar(0.3), scalar(0.2), 0.1)[0] == doctest::Approx(0.5).epsilon(1e-15));

  SchemeSemigroup ou = ou_semigroup(1.0, 1.0, 2);
  // deterministic part only
  CHECK(ou.scheme.psi(0.0, scalar(1.0), scalar(0.0), 0.5)[0] == doctest::Approx(0.5).epsilon(1e-15));
  // z = 0, delta = 0 keeps the state exactly
  CHECK(step(ou, scalar(1.0), scalar(0.0), 0.0)[0] == 1.0);
  // x + delta*b + sqrt(delta)*z
  CHECK(step(ou, scalar(1.0), scalar(2.0), 0.25)[0] == doctest::Approx(1.75).epsilon(1e-15));

  CHECK_THROWS_AS(make_euler(2, 1, [](const Vec&) { return Vec(Vec::Zero(1)); },
                             [](const Vec&) { return Eigen::MatrixXd::Identity(2, 1); }),
                  std::invalid_argument);
  CHECK_THROWS_AS(step(ou, Vec::Zero(2), scalar(0.0), 0.1), std::invalid_argument);
}

TEST_CASE("fixed point of the one-step map on a random cloud") {
  const auto nonlinear = make_euler(
      1, 1, [](const Vec& x) { return Vec(x.array().sin().matrix()); },
      [](const Vec& x) { return Eigen::MatrixXd::Constant(1, 1, 1.0 + 0.1 * std::cos(x[0])); });
  const SchemeFunction schemes[] = {nonlinear, make_ou_scheme(1.0, 1.0), make_brownian_scheme()};
  for (const auto& s : schemes) {
    const auto cloud = sample_cloud(s, 3.0, 1000, 99);
    for (const auto& p : cloud) {
      const Vec out = s.psi(p.kappa, p.x, Vec::Zero(s.dim_z), 0.0);
      CHECK(std::abs(out[0] - p.x[0]) <= 1e-14);
    }
  }
}

TEST_CASE("non-finite states are reported") {
  SchemeSemigroup bad;
  bad.scheme.psi = [](double, const Vec& x, const Vec&, double) {
    return Vec(x * std::numeric_limits<double>::infinity());
  };
  bad.noise = gaussian_noise(1);
  bad.grid = GridSpec{1.0, 2, 1};
  CHECK_THROWS_WITH_AS(step(bad, scalar(1.0), scalar(0.0), 0.5),
                       doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("plain Monte Carlo expectation") {
  SchemeSemigroup ou = ou_semigroup(1.0, 1.0, 4);

  const auto one = weak_expectation(ou, scalar(1.0), 1.0, [](const Vec&) { return 1.0; }, 2000, 7);
  CHECK(one.mean == 1.0);
  CHECK(one.stderr_ == 0.0);
  CHECK(one.work == 2000 * 4);

  // Brownian variance after k steps of size delta is k * delta
  SchemeSemigroup bm{make_brownian_scheme(), gaussian_noise(1), {}, GridSpec{1.0, 4, 1}};
  const auto var =
      weak_expectation(bm, scalar(0.0), 0.75, [](const Vec& x) { return x[0] * x[0]; }, 200000, 3);
  CHECK(std::abs(var.mean - 0.75) < 4.0 * var.stderr_);

  CHECK_THROWS_AS(weak_expectation(ou, scalar(1.0), 0.3, [](const Vec&) { return 1.0; }, 100, 1),
                  std::invalid_argument);  // off-grid time
  CHECK_THROWS_AS(weak_expectation(ou, scalar(1.0), 1.0, [](const Vec&) { return 1.0; }, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("identical seeds reproduce bit-for-bit across worker counts") {
  SchemeSemigroup ou = ou_semigroup(1.0, 1.0, 8);
  auto f = [](const Vec& x) { return x[0] * x[0]; };
  const auto a = weak_expectation(ou, scalar(1.0), 1.0, f, 50000, 42, 1);
  const auto b = weak_expectation(ou, scalar(1.0), 1.0, f, 50000, 42, 3);
  const auto c = weak_expectation(ou, scalar(1.0), 1.0, f, 50000, 43, 1);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.mean != c.mean);
}

TEST_CASE("closed-form reference functionals") {
  CHECK(ou_oracle(1.0, 1.0, 1.0, 1.0, OuFunctional::mean()) ==
        doctest::Approx(0.3678794411714423).epsilon(1e-14));
  CHECK(ou_oracle(1.0, 1.0, 1.0, 1.0, OuFunctional::second_moment()) ==
        doctest::Approx(0.5676676416183063).epsilon(1e-13));
  CHECK(ou_oracle(2.0, 0.7, 0.0, 3.0, OuFunctional::cdf_at(0.0)) == doctest::Approx(0.5).epsilon(1e-14));

  const double var = (1.0 - std::exp(-2.0)) / 2.0;
  CHECK(ou_oracle(1.0, 1.0, 1.0, 1.0, OuFunctional::density_at(std::exp(-1.0))) ==
        doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * var)).epsilon(1e-13));
  CHECK(ou_oracle(1.0, 1.0, 1.0, 1.0, OuFunctional::cos_expectation()) ==
        doctest::Approx(std::cos(std::exp(-1.0)) * std::exp(-0.5 * var)).epsilon(1e-13));
  CHECK_THROWS_AS(ou_oracle(0.0, 1.0, 1.0, 1.0, OuFunctional::mean()), std::invalid_argument);
}

TEST_CASE("scheme norm lower estimates") {
  const auto cloud = fixed_cloud_1d();

  // x + z: the only surviving derivative is d_z psi = 1
  const auto bm = psi_norm_estimate(make_brownian_scheme(), 2, cloud);
  CHECK(bm.norm == 1.0);
  CHECK(bm.gronwall == doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-14));

  // affine scheme: analytic sum is sigma + a*sup|x| + a (d_z, d_t, d_x d_t)
  const auto ou = psi_norm_estimate(make_ou_scheme(1.0, 1.0), 3, cloud);
  CHECK(ou.norm == doctest::Approx(4.0).epsilon(1e-13));

  // second and higher z/t derivatives vanish identically
  const auto s = make_ou_scheme(1.0, 1.0);
  CHECK(scheme_derivative(s, {0}, {2}, 0, 0.0, scalar(1.5), scalar(0.5), 0.1)[0] == 0.0);
  CHECK(scheme_derivative(s, {0}, {0}, 2, 0.0, scalar(1.5), scalar(0.5), 0.1)[0] == 0.0);
  CHECK(scheme_derivative(s, {0}, {1}, 1, 0.0, scalar(1.5), scalar(0.5), 0.1)[0] == 0.0);

  // finite-difference fallback agrees with the analytic instance
  const auto fd = make_euler(1, 1, [](const Vec& x) { return Vec(-x); },
                             [](const Vec&) { return Eigen::MatrixXd::Identity(1, 1); });
  const auto fd_est = psi_norm_estimate(fd, 3, cloud);
  CHECK(fd_est.norm == doctest::Approx(ou.norm).epsilon(2e-3));

  CHECK_THROWS_AS(psi_norm_estimate(s, 2, {}), std::invalid_argument);
}

TEST_CASE("ellipticity floor") {
  const auto cloud = fixed_cloud_1d();
  CHECK(ellipticity_floor(make_ou_scheme(1.0, 1.0), cloud) == doctest::Approx(1.0).epsilon(1e-12));

  // diag(1, 2) diffusion in 2D: smaller singular value squared is 1
  auto flat2 = make_euler(2, 2, [](const Vec&) { return Vec(Vec::Zero(2)); },
                          [](const Vec&) {
                            Eigen::MatrixXd s(2, 2);
                            s << 1, 0, 0, 2;
                            return s;
                          });
  std::vector<CloudPoint> cloud2{{0.0, Vec::Zero(2), Vec::Zero(2), 0.0}};
  CHECK(ellipticity_floor(flat2, cloud2) == doctest::Approx(1.0).epsilon(1e-6));

  auto degenerate = make_euler(1, 1, [](const Vec&) { return Vec(Vec::Zero(1)); },
                               [](const Vec&) { return Eigen::MatrixXd::Zero(1, 1); });
  CHECK(ellipticity_floor(degenerate, cloud) == 0.0);
}

TEST_CASE("noise moments") {
  const auto g2 = moment_estimate(gaussian_noise(1), 2, 100000, 5);
  CHECK(std::abs(g2.mean - 1.0) < 0.02);
  const auto g4 = moment_estimate(gaussian_noise(1), 4, 200000, 5);
  CHECK(std::abs(g4.mean - 3.0) < 0.15);
  // clamped at one when the raw moment is below one
  CHECK(moment_estimate(uniform_noise_1d(), 2, 50000, 5).mean == 1.0);
  CHECK_THROWS_AS(moment_estimate(gaussian_noise(1), 0, 10, 1), std::invalid_argument);
}

TEST_CASE("noise laws are centered") {
  for (const auto& law : {gaussian_noise(1), uniform_noise_1d(), rademacher_noise_1d()}) {
    rng::Stream st = rng::Stream::derive(17, 0);
    Neumaier sum, sum2;
    const int n = 200000;
    for (int k = 0; k < n; ++k) {
      const double v = law.sample(st)[0];
      sum.add(v);
      sum2.add(v * v);
    }
    const double mean = sum.value() / n;
    const double sd = std::sqrt(sum2.value() / n - mean * mean);
    CHECK(std::abs(mean) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
  }
}

// One Euler step against the generator: the expansion error
// E[f(X_delta)] - f(x) - delta * (L f)(x) shrinks like delta^2.
TEST_CASE("one-step consistency at weak order one") {
  const double a = 1.0, sigma = 1.0, x = 0.7;
  auto f = [](double v) { return std::cos(v); };
  const double lf = -a * x * (-std::sin(x)) + 0.5 * sigma * sigma * (-std::cos(x));

  double logs_d[3], logs_e[3];
  int i = 0;
  for (double delta : {0.125, 0.0625, 0.03125}) {
    auto integrand = [&](double z) {
      const double xs = x - delta * a * x + sigma * std::sqrt(delta) * z;
      return f(xs) * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    };
    const double expect = adaptive_simpson(integrand, -8.0, 8.0, 1e-12);
    const double err = std::abs(expect - f(x) - delta * lf);
    logs_d[i] = std::log(delta);
    logs_e[i] = std::log(err);
    ++i;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int k = 0; k < 3; ++k) {
    sx += logs_d[k];
    sy += logs_e[k];
    sxx += logs_d[k] * logs_d[k];
    sxy += logs_d[k] * logs_e[k];
  }
  const double slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
  CHECK(slope >= 1.7);
}

TEST_SUITE_END();
