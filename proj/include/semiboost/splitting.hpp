// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "semiboost/estimate.hpp"
#include "semiboost/order_params.hpp"
#include "semiboost/rng.hpp"
#include "semiboost/scheme.hpp"

namespace semiboost {

/// Smooth plateau bump of radius v: equal to 1 on [0, v], equal to
/// exp(1 - v^2 / (v^2 - (|z| - v)^2)) on the shell (v, 2v), and 0 beyond.
/// Values lie in [0, 1] and the function is continuous.
double bump(double v, double z);

/// Radial bump in any dimension, bump(v, |z|).
double bump(double v, const Vec& z);

/// Derivative of order q of log bump at z, using the closed form on the
/// shell (v, 2v).  Returns 0 on the plateau and, by convention, outside the
/// support.  Only q in {1, 2} is implemented.
double bump_log_derivative(double v, double z, int q);

/// Largest eps such that the noise density stays >= eps on the closed ball
/// of radius r_star around z_star, evaluated on a deterministic grid, minus
/// the declared margin.  Throws std::invalid_argument when the noise
/// carries no density or the resulting bound is not positive.
double fit_lower_bound(const NoiseLaw& noise, const Vec& z_star, double r_star,
                       double margin = 0.0);

/// Decomposition of the unscaled noise Z into the mixture
/// chi U + (1 - chi) V with chi ~ Bernoulli(m_star).  U concentrates the
/// density lower bound around z_star, V carries the residual by rejection
/// against the base law.  Scaled variants multiply the raw draws by
/// sqrt(delta) so the mixture matches the scheme increment law.
struct SplitNoise {
  NoiseLaw base;
  Vec z_star;
  double r_star = 1.0;
  double eps_star = 0.0;
  double m_star = 0.0;
  double delta = 0.0;
  /// Diagnostic switch: with localize = false the path weight is forced
  /// to 1 and the localized estimator collapses to the plain one.
  bool localize = true;

  bool sample_chi(rng::Stream& stream) const;
  Vec sample_u_raw(rng::Stream& stream) const;
  Vec sample_v_raw(rng::Stream& stream) const;
  Vec sample_u(rng::Stream& stream) const;
  Vec sample_v(rng::Stream& stream) const;
  /// One scaled mixture draw, distributed as sqrt(delta) Z.
  Vec sample_mixture(rng::Stream& stream) const;
};

/// Fits the lower bound, integrates the bump of radius r_star / 2 and
/// returns the assembled splitting for step size delta.  The mixture mass
/// m_star = eps_star * integral(bump) must land in (0, 1).
SplitNoise build_split(const NoiseLaw& noise, const Vec& z_star, double r_star, double delta);

/// Localization weight of one path over (0, t]: the indicator that the
/// splitting frequency reaches m_star / 2 times the product of bumps of
/// radius delta^{-1/4} / 2 at the raw increments.  Paths must cover every
/// grid point; K = floor(t / delta) must be >= 1.
double theta_weight(const SplitNoise& split, const std::vector<bool>& chi_path,
                    const std::vector<Vec>& z_path, double t);

struct RegularizedEstimate {
  MCEstimate estimate;  ///< self-normalized weighted mean of f
  MCEstimate theta;     ///< plain mean of the localization weight
};

/// Localized expectation (sum theta f) / (sum theta) with path noise drawn
/// through the splitting representation.  Throws std::runtime_error when
/// every weight vanishes.
RegularizedEstimate regularized_expectation(const SchemeSemigroup& sg, const SplitNoise& split,
                                            const Vec& x0, double t,
                                            const std::function<double(const Vec&)>& f,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            int workers = 1);

/// Expectation of f at the blurred end state X_t + delta^theta_exp G with G
/// a fresh standard normal, delta the grid step.
MCEstimate convolved_expectation(const SchemeSemigroup& sg, double theta_exp, const Vec& x0,
                                 double t, const std::function<double(const Vec&)>& f,
                                 std::uint64_t n_samples, std::uint64_t seed, int workers = 1);

struct DensityRow {
  double y = 0.0;
  double p = 0.0;
  double stderr_ = 0.0;
};

struct DensityTable {
  std::vector<DensityRow> rows;
  std::uint64_t n_samples = 0;
  std::uint64_t work = 0;
};

/// Density of the blurred boosted end state on a grid of evaluation
/// points: each sample contributes the exact Gaussian smoothing kernel of
/// scale delta^theta_exp centered at its end state, so no binning is
/// involved.  delta is the fine-level step of params.  One-dimensional
/// state only.
DensityTable convolved_density(const OrderParams& params, const SchemeSemigroup& sg,
                               double theta_exp, const Vec& x0,
                               const std::vector<double>& y_grid, std::uint64_t n_samples,
                               std::uint64_t seed, int workers = 1);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| for 1D samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace semiboost
