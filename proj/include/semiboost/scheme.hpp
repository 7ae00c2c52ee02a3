// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "semiboost/estimate.hpp"
#include "semiboost/grid.hpp"
#include "semiboost/rng.hpp"

namespace semiboost {

using Vec = Eigen::VectorXd;

/// One-step map of a simulable scheme.  A step of size delta with noise
/// draw z moves the state to psi(kappa, x, sqrt(delta) * z, delta); the
/// map satisfies psi(kappa, x, 0, 0) = x.
struct SchemeFunction {
  int dim_x = 1;  ///< state dimension
  int dim_z = 1;  ///< noise dimension

  /// psi(kappa, x, y, delta); y is the already-scaled noise sqrt(delta)*z.
  std::function<Vec(double, const Vec&, const Vec&, double)> psi;

  /// Analytic mixed derivative d_x^ax d_z^bz d_delta^ct of psi, declared
  /// up to total order `declared_order`; beyond it (or when absent)
  /// nested finite differences on psi are used.
  int declared_order = 0;
  std::function<Vec(const std::vector<int>& ax, const std::vector<int>& bz, int ct, double kappa,
                    const Vec& x, const Vec& z, double delta)>
      derivative;

  /// Finite-difference step for first-order derivatives; higher orders
  /// widen it (fd_step^(3/(k+2)) at total order k) to balance truncation
  /// against roundoff.  The delta direction always differences forward
  /// since the domain is delta >= 0.
  double fd_step = 1e-5;
};

/// Mixed partial derivative of psi (analytic or finite differences).
Vec scheme_derivative(const SchemeFunction& s, const std::vector<int>& ax,
                      const std::vector<int>& bz, int ct, double kappa, const Vec& x, const Vec& z,
                      double delta);

struct NoiseLaw {
  int dim = 1;
  std::string name;
  std::function<Vec(rng::Stream&)> sample;
  std::function<double(const Vec&)> density;  ///< null when not explicit
};

NoiseLaw gaussian_noise(int dim);
NoiseLaw uniform_noise_1d();     ///< uniform on [-1, 1]
NoiseLaw rademacher_noise_1d();  ///< +-1 equiprobable, no density

/// Scheme plus noise plus working grid: the one-step kernel at step delta
/// is the law of psi(kappa, x, sqrt(delta) Z, delta), multi-step kernels
/// compose along the grid.
struct SchemeSemigroup {
  SchemeFunction scheme;
  NoiseLaw noise;
  /// Auxiliary innovation kappa_t; degenerate constant by default.
  std::function<double(rng::Stream&)> kappa_law = [](rng::Stream&) { return 0.0; };
  GridSpec grid;
};

/// Euler step psi(kappa, x, y, delta) = x + delta * b(x) + sigma(x) * y.
/// Derivatives fall back to finite differences.
SchemeFunction make_euler(int dim_x, int dim_z, std::function<Vec(const Vec&)> b,
                          std::function<Eigen::MatrixXd(const Vec&)> sigma);

/// 1D Ornstein-Uhlenbeck Euler scheme x - delta*a*x + sigma*y with
/// analytic derivatives.
SchemeFunction make_ou_scheme(double a, double sigma);

/// 1D Brownian scheme x + y with analytic derivatives.
SchemeFunction make_brownian_scheme();

/// One scheme step with freshly drawn kappa.  The overload without a
/// stream uses the degenerate default kappa = 0.
Vec step(const SchemeSemigroup& sg, const Vec& x, const Vec& z, double delta, rng::Stream& stream);
Vec step(const SchemeSemigroup& sg, const Vec& x, const Vec& z, double delta);

/// Plain Monte Carlo estimate of E[f(X_t) | X_0 = x0] along sg's grid.
MCEstimate weak_expectation(const SchemeSemigroup& sg, const Vec& x0, double t,
                            const std::function<double(const Vec&)>& f, std::uint64_t n_samples,
                            std::uint64_t seed, int workers = 1);

/// Closed-form functionals of the OU process
/// X_T ~ Normal(x0 e^{-aT}, sigma^2 (1 - e^{-2aT}) / (2a)).
struct OuFunctional {
  enum class Kind { mean, second_moment, cdf_at, density_at, cos_expectation };
  Kind kind = Kind::mean;
  double arg = 0.0;

  static OuFunctional mean() { return {Kind::mean, 0.0}; }
  static OuFunctional second_moment() { return {Kind::second_moment, 0.0}; }
  static OuFunctional cdf_at(double k) { return {Kind::cdf_at, k}; }
  static OuFunctional density_at(double y) { return {Kind::density_at, y}; }
  static OuFunctional cos_expectation() { return {Kind::cos_expectation, 0.0}; }
};

double ou_oracle(double a, double sigma, double x0, double T, const OuFunctional& functional);

/// Evaluation points for the norm and ellipticity diagnostics.
struct CloudPoint {
  double kappa = 0.0;
  Vec x;
  Vec z;
  double delta = 0.0;
};

/// Random cloud: x, z uniform in [-radius, radius] per component, delta
/// uniform in [0, 0.1], kappa = 0.
std::vector<CloudPoint> sample_cloud(const SchemeFunction& s, double radius, int count,
                                     std::uint64_t seed);

struct PsiNormEstimate {
  double norm = 0.0;      ///< lower estimate of the order-r scheme norm
  double gronwall = 0.0;  ///< (1 + norm_r) * exp(norm_3^2), same cloud
};

/// Lower estimate over the cloud of the scheme norm of order r: the sum
/// over mixed derivatives d_x^a d_z^b d_delta^c with |a| <= r and
/// 1 <= |b| + c <= r - |a| of their sup over the cloud, clamped below by
/// one.  Pure-x derivatives are excluded by construction.
PsiNormEstimate psi_norm_estimate(const SchemeFunction& s, int r,
                                  const std::vector<CloudPoint>& cloud);

/// Min over the cloud of the smallest eigenvalue of J J^T with
/// J = d_z psi at (z = 0, delta = 0); an empirical ellipticity floor.
double ellipticity_floor(const SchemeFunction& s, const std::vector<CloudPoint>& cloud);

/// 1 v E|Z|^p by Monte Carlo; work counts noise draws.
MCEstimate moment_estimate(const NoiseLaw& noise, int p, std::uint64_t n_samples,
                           std::uint64_t seed);

}  // namespace semiboost
