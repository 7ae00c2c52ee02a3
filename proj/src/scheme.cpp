// SPDX-License-Identifier: MIT
#include "semiboost/scheme.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace semiboost {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double fd_step_for(double base, int total_order) {
  if (total_order <= 1) return base;
  return std::pow(base, 3.0 / (total_order + 2.0));
}

int index_total(const std::vector<int>& idx) {
  int t = 0;
  for (int v : idx) {
    if (v < 0) throw std::invalid_argument("negative derivative index");
    t += v;
  }
  return t;
}

[[noreturn]] void report_non_finite(const Vec& x, const Vec& z, double delta) {
  std::ostringstream os;
  os << "scheme step produced a non-finite state: x = [" << x.transpose() << "], z = ["
     << z.transpose() << "], delta = " << delta;
  throw std::runtime_error(os.str());
}

void enumerate_multi(int dims, int max_total, std::vector<int>& cur, int pos,
                     const std::function<void(const std::vector<int>&)>& cb) {
  if (pos == dims) {
    cb(cur);
    return;
  }
  for (int v = 0; v <= max_total; ++v) {
    cur[pos] = v;
    enumerate_multi(dims, max_total - v, cur, pos + 1, cb);
  }
  cur[pos] = 0;
}

void for_each_multi(int dims, int max_total, const std::function<void(const std::vector<int>&)>& cb) {
  std::vector<int> cur(dims, 0);
  enumerate_multi(dims, max_total, cur, 0, cb);
}

}  // namespace

Vec scheme_derivative(const SchemeFunction& s, const std::vector<int>& ax,
                      const std::vector<int>& bz, int ct, double kappa, const Vec& x, const Vec& z,
                      double delta) {
  if (static_cast<int>(ax.size()) != s.dim_x || static_cast<int>(bz.size()) != s.dim_z)
    throw std::invalid_argument("derivative multi-index dimension mismatch");
  if (ct < 0) throw std::invalid_argument("negative derivative index");
  const int total = index_total(ax) + index_total(bz) + ct;
  if (total == 0) return s.psi(kappa, x, z, delta);
  if (s.derivative && s.declared_order >= total)
    return s.derivative(ax, bz, ct, kappa, x, z, delta);

  const double h = fd_step_for(s.fd_step, total);
  for (int i = 0; i < s.dim_x; ++i)
    if (ax[i] > 0) {
      auto a2 = ax;
      --a2[i];
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      return (scheme_derivative(s, a2, bz, ct, kappa, xp, z, delta) -
              scheme_derivative(s, a2, bz, ct, kappa, xm, z, delta)) /
             (2.0 * h);
    }
  for (int i = 0; i < s.dim_z; ++i)
    if (bz[i] > 0) {
      auto b2 = bz;
      --b2[i];
      Vec zp = z, zm = z;
      zp[i] += h;
      zm[i] -= h;
      return (scheme_derivative(s, ax, b2, ct, kappa, x, zp, delta) -
              scheme_derivative(s, ax, b2, ct, kappa, x, zm, delta)) /
             (2.0 * h);
    }
  // delta direction: second-order forward difference, domain [0, inf)
  const Vec g0 = scheme_derivative(s, ax, bz, ct - 1, kappa, x, z, delta);
  const Vec g1 = scheme_derivative(s, ax, bz, ct - 1, kappa, x, z, delta + h);
  const Vec g2 = scheme_derivative(s, ax, bz, ct - 1, kappa, x, z, delta + 2.0 * h);
  return (-3.0 * g0 + 4.0 * g1 - g2) / (2.0 * h);
}

NoiseLaw gaussian_noise(int dim) {
  if (dim < 1) throw std::invalid_argument("noise dimension must be >= 1");
  NoiseLaw law;
  law.dim = dim;
  law.name = "gaussian";
  law.sample = [dim](rng::Stream& st) {
    Vec z(dim);
    for (int i = 0; i < dim; ++i) z[i] = st.next_normal();
    return z;
  };
  law.density = [dim](const Vec& z) {
    return std::exp(-0.5 * z.squaredNorm()) / std::pow(kTwoPi, 0.5 * dim);
  };
  return law;
}

NoiseLaw uniform_noise_1d() {
  NoiseLaw law;
  law.dim = 1;
  law.name = "uniform";
  law.sample = [](rng::Stream& st) {
    Vec z(1);
    z[0] = 2.0 * st.next_uniform() - 1.0;
    return z;
  };
  law.density = [](const Vec& z) { return std::abs(z[0]) <= 1.0 ? 0.5 : 0.0; };
  return law;
}

NoiseLaw rademacher_noise_1d() {
  NoiseLaw law;
  law.dim = 1;
  law.name = "rademacher";
  law.sample = [](rng::Stream& st) {
    Vec z(1);
    z[0] = st.next_uniform() < 0.5 ? -1.0 : 1.0;
    return z;
  };
  return law;
}

SchemeFunction make_euler(int dim_x, int dim_z, std::function<Vec(const Vec&)> b,
                          std::function<Eigen::MatrixXd(const Vec&)> sigma) {
  if (dim_x < 1 || dim_z < 1) throw std::invalid_argument("dimensions must be >= 1");
  const Vec probe = Vec::Zero(dim_x);
  if (b(probe).size() != dim_x) throw std::invalid_argument("drift dimension mismatch");
  const Eigen::MatrixXd s0 = sigma(probe);
  if (s0.rows() != dim_x || s0.cols() != dim_z)
    throw std::invalid_argument("diffusion dimension mismatch");

  SchemeFunction s;
  s.dim_x = dim_x;
  s.dim_z = dim_z;
  s.psi = [b = std::move(b), sigma = std::move(sigma)](double, const Vec& x, const Vec& y,
                                                       double delta) {
    return Vec(x + delta * b(x) + sigma(x) * y);
  };
  return s;
}

SchemeFunction make_ou_scheme(double a, double sigma) {
  SchemeFunction s;
  s.dim_x = 1;
  s.dim_z = 1;
  s.psi = [a, sigma](double, const Vec& x, const Vec& y, double delta) {
    Vec out(1);
    out[0] = x[0] - delta * a * x[0] + sigma * y[0];
    return out;
  };
  s.declared_order = 99;
  s.derivative = [a, sigma](const std::vector<int>& ax, const std::vector<int>& bz, int ct, double,
                            const Vec& x, const Vec&, double delta) {
    Vec out(1);
    const int da = ax[0], db = bz[0];
    if (da == 1 && db == 0 && ct == 0)
      out[0] = 1.0 - delta * a;
    else if (da == 0 && db == 1 && ct == 0)
      out[0] = sigma;
    else if (da == 0 && db == 0 && ct == 1)
      out[0] = -a * x[0];
    else if (da == 1 && db == 0 && ct == 1)
      out[0] = -a;
    else
      out[0] = 0.0;
    return out;
  };
  return s;
}

SchemeFunction make_brownian_scheme() {
  SchemeFunction s;
  s.dim_x = 1;
  s.dim_z = 1;
  s.psi = [](double, const Vec& x, const Vec& y, double) { return Vec(x + y); };
  s.declared_order = 99;
  s.derivative = [](const std::vector<int>& ax, const std::vector<int>& bz, int ct, double,
                    const Vec&, const Vec&, double) {
    Vec out(1);
    out[0] = ((ax[0] == 1 && bz[0] == 0 && ct == 0) || (ax[0] == 0 && bz[0] == 1 && ct == 0))
                 ? 1.0
                 : 0.0;
    return out;
  };
  return s;
}

Vec step(const SchemeSemigroup& sg, const Vec& x, const Vec& z, double delta, rng::Stream& stream) {
  if (x.size() != sg.scheme.dim_x || z.size() != sg.scheme.dim_z)
    throw std::invalid_argument("state or noise dimension mismatch");
  if (delta < 0.0) throw std::invalid_argument("step size must be >= 0");
  const double kappa = sg.kappa_law ? sg.kappa_law(stream) : 0.0;
  const Vec out = sg.scheme.psi(kappa, x, std::sqrt(delta) * z, delta);
  if (!out.allFinite()) report_non_finite(x, z, delta);
  return out;
}

Vec step(const SchemeSemigroup& sg, const Vec& x, const Vec& z, double delta) {
  rng::Stream degenerate(0);
  return step(sg, x, z, delta, degenerate);
}

MCEstimate weak_expectation(const SchemeSemigroup& sg, const Vec& x0, double t,
                            const std::function<double(const Vec&)>& f, std::uint64_t n_samples,
                            std::uint64_t seed, int workers) {
  const std::int64_t steps = sg.grid.index_of(t);
  const double delta = sg.grid.step();
  return run_mc(n_samples, workers, [&](std::uint64_t k) {
    rng::Stream stream = rng::Stream::derive(seed, k);
    Vec x = x0;
    for (std::int64_t s = 0; s < steps; ++s) x = step(sg, x, sg.noise.sample(stream), delta, stream);
    return SampleResult{f(x), static_cast<std::uint64_t>(steps)};
  });
}

double ou_oracle(double a, double sigma, double x0, double T, const OuFunctional& functional) {
  if (!(a > 0.0)) throw std::invalid_argument("mean-reversion rate must be > 0");
  if (T < 0.0) throw std::invalid_argument("horizon must be >= 0");
  const double mean = x0 * std::exp(-a * T);
  const double var = sigma * sigma * (1.0 - std::exp(-2.0 * a * T)) / (2.0 * a);
  const double sd = std::sqrt(var);
  switch (functional.kind) {
    case OuFunctional::Kind::mean:
      return mean;
    case OuFunctional::Kind::second_moment:
      return var + mean * mean;
    case OuFunctional::Kind::cdf_at:
      if (sd == 0.0) return functional.arg >= mean ? 1.0 : 0.0;
      return 0.5 * std::erfc(-(functional.arg - mean) / (sd * std::sqrt(2.0)));
    case OuFunctional::Kind::density_at:
      if (sd == 0.0) throw std::invalid_argument("degenerate law has no density");
      return std::exp(-0.5 * std::pow((functional.arg - mean) / sd, 2)) / (sd * std::sqrt(kTwoPi));
    case OuFunctional::Kind::cos_expectation:
      return std::cos(mean) * std::exp(-0.5 * var);
  }
  throw std::logic_error("unreachable functional kind");
}

std::vector<CloudPoint> sample_cloud(const SchemeFunction& s, double radius, int count,
                                     std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("cloud must be non-empty");
  rng::Stream stream = rng::Stream::derive(seed, 0x636c6f7564ull);
  std::vector<CloudPoint> cloud(count);
  for (auto& p : cloud) {
    p.x = Vec(s.dim_x);
    p.z = Vec(s.dim_z);
    for (int i = 0; i < s.dim_x; ++i) p.x[i] = radius * (2.0 * stream.next_uniform() - 1.0);
    for (int i = 0; i < s.dim_z; ++i) p.z[i] = radius * (2.0 * stream.next_uniform() - 1.0);
    p.delta = 0.1 * stream.next_uniform();
  }
  return cloud;
}

PsiNormEstimate psi_norm_estimate(const SchemeFunction& s, int r,
                                  const std::vector<CloudPoint>& cloud) {
  if (cloud.empty()) throw std::invalid_argument("cloud must be non-empty");
  if (r < 1) throw std::invalid_argument("norm order must be >= 1");

  auto order_norm = [&](int order) {
    double total = 0.0;
    for_each_multi(s.dim_x, order, [&](const std::vector<int>& ax) {
      const int ra = index_total(ax);
      for_each_multi(s.dim_z, order - ra, [&](const std::vector<int>& bz) {
        const int rb = index_total(bz);
        for (int ct = 0; rb + ct <= order - ra; ++ct) {
          if (rb + ct < 1) continue;
          double sup = 0.0;
          for (const auto& p : cloud)
            sup = std::max(sup,
                           scheme_derivative(s, ax, bz, ct, p.kappa, p.x, p.z, p.delta).norm());
          total += sup;
        }
      });
    });
    return std::max(1.0, total);
  };

  PsiNormEstimate out;
  out.norm = order_norm(r);
  const double n3 = (r == 3) ? out.norm : order_norm(3);
  out.gronwall = (1.0 + out.norm) * std::exp(n3 * n3);
  return out;
}

double ellipticity_floor(const SchemeFunction& s, const std::vector<CloudPoint>& cloud) {
  if (cloud.empty()) throw std::invalid_argument("cloud must be non-empty");
  double floor_val = std::numeric_limits<double>::infinity();
  for (const auto& p : cloud) {
    Eigen::MatrixXd j(s.dim_x, s.dim_z);
    const Vec z0 = Vec::Zero(s.dim_z);
    for (int col = 0; col < s.dim_z; ++col) {
      std::vector<int> bz(s.dim_z, 0);
      bz[col] = 1;
      j.col(col) = scheme_derivative(s, std::vector<int>(s.dim_x, 0), bz, 0, p.kappa, p.x, z0, 0.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j * j.transpose());
    floor_val = std::min(floor_val, es.eigenvalues().minCoeff());
  }
  return floor_val < 1e-12 ? 0.0 : floor_val;
}

MCEstimate moment_estimate(const NoiseLaw& noise, int p, std::uint64_t n_samples,
                           std::uint64_t seed) {
  if (p < 1) throw std::invalid_argument("moment order must be >= 1");
  MCEstimate est = run_mc(n_samples, 1, [&](std::uint64_t k) {
    rng::Stream stream = rng::Stream::derive(seed, k, 0x6d6f6dull);
    return SampleResult{std::pow(noise.sample(stream).norm(), p), 1};
  });
  est.mean = std::max(1.0, est.mean);
  return est;
}

}  // namespace semiboost
