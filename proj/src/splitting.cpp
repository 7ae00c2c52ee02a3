// SPDX-License-Identifier: MIT
#include "semiboost/splitting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "semiboost/quadrature.hpp"
#include "semiboost/random_grid.hpp"

namespace semiboost {

namespace {

constexpr double kPi = 3.14159265358979323846264338328;
constexpr double kTwoPi = 2.0 * kPi;
constexpr std::uint64_t kBlock = 4096;
constexpr int kRejectionCap = 100000;

void require_radius(double v) {
  if (!(v > 0.0)) throw std::invalid_argument("bump radius must be positive");
}

/// Lebesgue mass of the radial bump of radius v in dimension 1..3.
double bump_mass(int dim, double v) {
  const double tol = 1e-9;
  const auto shell = [v](double r) { return bump(v, r); };
  if (dim == 1) return 2.0 * adaptive_simpson(shell, 0.0, 2.0 * v, tol);
  if (dim == 2)
    return kTwoPi * adaptive_simpson([&](double r) { return shell(r) * r; }, 0.0, 2.0 * v, tol);
  if (dim == 3)
    return 2.0 * kTwoPi *
           adaptive_simpson([&](double r) { return shell(r) * r * r; }, 0.0, 2.0 * v, tol);
  throw std::invalid_argument("bump mass supports dimensions 1..3");
}

struct VecBlock {
  std::vector<double> sums;
  std::uint64_t work = 0;
};

/// Blockwise compensated reduction of a vector-valued per-sample statistic.
/// Same contract as run_mc: fixed block order, bit-identical for any worker
/// count, `sample` pure given its index.  `out` arrives zeroed; the return
/// value of `sample` is its work.
std::vector<double> reduce_vector(
    std::uint64_t n_samples, int workers, std::size_t width,
    const std::function<std::uint64_t(std::uint64_t, std::vector<double>&)>& sample,
    std::uint64_t& work_out) {
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");
  if (workers < 1) throw std::invalid_argument("need at least one worker");

  const std::uint64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<VecBlock> blocks(n_blocks);

  auto run_block = [&](std::uint64_t b) {
    std::vector<Neumaier> acc(width);
    std::vector<double> out(width);
    std::uint64_t work = 0;
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(n_samples, lo + kBlock);
    for (std::uint64_t k = lo; k < hi; ++k) {
      std::fill(out.begin(), out.end(), 0.0);
      work += sample(k, out);
      for (std::size_t j = 0; j < width; ++j) acc[j].add(out[j]);
    }
    VecBlock res;
    res.sums.resize(width);
    for (std::size_t j = 0; j < width; ++j) res.sums[j] = acc[j].value();
    res.work = work;
    blocks[b] = std::move(res);
  };

  if (workers == 1 || n_blocks == 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    const int count = static_cast<int>(std::min<std::uint64_t>(workers, n_blocks));
    pool.reserve(count);
    for (int w = 0; w < count; ++w)
      pool.emplace_back([&] {
        try {
          for (std::uint64_t b = next.fetch_add(1); b < n_blocks && !failed.load();
               b = next.fetch_add(1))
            run_block(b);
        } catch (...) {
          // first failure wins; the join below orders the read of `error`
          if (!failed.exchange(true)) error = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<Neumaier> acc(width);
  std::uint64_t work = 0;
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < width; ++j) acc[j].add(b.sums[j]);
    work += b.work;
  }
  std::vector<double> out(width);
  for (std::size_t j = 0; j < width; ++j) out[j] = acc[j].value();
  work_out = work;
  return out;
}

MCEstimate moments_to_estimate(double sum, double sum_sq, std::uint64_t n_samples,
                               std::uint64_t work) {
  MCEstimate out;
  out.n_samples = n_samples;
  out.work = work;
  const auto n = static_cast<double>(n_samples);
  out.mean = sum / n;
  if (n_samples > 1) {
    const double ss = std::max(0.0, sum_sq - n * out.mean * out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

}  // namespace

double bump(double v, double z) {
  require_radius(v);
  const double r = std::abs(z);
  if (r <= v) return 1.0;
  if (r >= 2.0 * v) return 0.0;
  const double u = r - v;
  const double d = v * v - u * u;
  return std::exp(1.0 - v * v / d);
}

double bump(double v, const Vec& z) { return bump(v, z.norm()); }

double bump_log_derivative(double v, double z, int q) {
  require_radius(v);
  if (q != 1 && q != 2) throw std::invalid_argument("bump log derivative supports orders 1 and 2");
  const double r = std::abs(z);
  if (r <= v || r >= 2.0 * v) return 0.0;
  const double u = r - v;
  const double d = v * v - u * u;
  if (q == 1) {
    const double radial = -2.0 * v * v * u / (d * d);
    return z < 0.0 ? -radial : radial;
  }
  return -2.0 * v * v * (1.0 / (d * d) + 4.0 * u * u / (d * d * d));
}

double fit_lower_bound(const NoiseLaw& noise, const Vec& z_star, double r_star, double margin) {
  if (!noise.density)
    throw std::invalid_argument("noise " + noise.name +
                                " is not Lebesgue lower bounded: no density");
  if (!(r_star > 0.0)) throw std::invalid_argument("ball radius must be positive");
  if (z_star.size() != noise.dim) throw std::invalid_argument("ball center dimension mismatch");
  if (noise.dim > 3) throw std::invalid_argument("lower bound fit supports dimensions 1..3");

  const int pts = noise.dim == 1 ? 201 : 41;
  double low = std::numeric_limits<double>::infinity();
  std::vector<int> idx(noise.dim, 0);
  Vec w(noise.dim);
  while (true) {
    for (int d = 0; d < noise.dim; ++d)
      w[d] = z_star[d] + r_star * (2.0 * idx[d] / (pts - 1.0) - 1.0);
    if ((w - z_star).norm() <= r_star * (1.0 + 1e-12)) low = std::min(low, noise.density(w));
    int d = 0;
    for (; d < noise.dim; ++d) {
      if (++idx[d] < pts) break;
      idx[d] = 0;
    }
    if (d == noise.dim) break;
  }

  const double eps = low - margin;
  if (!(eps > 0.0))
    throw std::invalid_argument("noise " + noise.name +
                                " is not Lebesgue lower bounded on the requested ball");
  return eps;
}

bool SplitNoise::sample_chi(rng::Stream& stream) const { return stream.next_uniform() < m_star; }

Vec SplitNoise::sample_u_raw(rng::Stream& stream) const {
  const double v = 0.5 * r_star;
  Vec w(base.dim);
  for (int it = 0; it < kRejectionCap; ++it) {
    for (int d = 0; d < base.dim; ++d) w[d] = r_star * (2.0 * stream.next_uniform() - 1.0);
    if (stream.next_uniform() <= bump(v, w)) return z_star + w;
  }
  throw std::runtime_error("bump rejection sampler did not accept");
}

Vec SplitNoise::sample_v_raw(rng::Stream& stream) const {
  const double v = 0.5 * r_star;
  for (int it = 0; it < kRejectionCap; ++it) {
    const Vec w = base.sample(stream);
    const double rho = base.density(w);
    const double cut = eps_star * bump(v, Vec(w - z_star));
    // the splitting exists only while the density dominates its bump part
    if (cut > rho * (1.0 + 1e-9))
      throw std::runtime_error("residual rejection weight outside [0, 1]");
    const double ratio = rho > 0.0 ? std::min(cut / rho, 1.0) : 0.0;
    if (stream.next_uniform() <= 1.0 - ratio) return w;
  }
  throw std::runtime_error("residual rejection sampler did not accept");
}

Vec SplitNoise::sample_u(rng::Stream& stream) const {
  return std::sqrt(delta) * sample_u_raw(stream);
}

Vec SplitNoise::sample_v(rng::Stream& stream) const {
  return std::sqrt(delta) * sample_v_raw(stream);
}

Vec SplitNoise::sample_mixture(rng::Stream& stream) const {
  return sample_chi(stream) ? sample_u(stream) : sample_v(stream);
}

SplitNoise build_split(const NoiseLaw& noise, const Vec& z_star, double r_star, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("step size must be positive");
  SplitNoise split;
  split.base = noise;
  split.z_star = z_star;
  split.r_star = r_star;
  split.delta = delta;
  split.eps_star = fit_lower_bound(noise, z_star, r_star);
  split.m_star = split.eps_star * bump_mass(noise.dim, 0.5 * r_star);
  if (!(split.m_star > 0.0) || !(split.m_star < 1.0))
    throw std::invalid_argument("splitting mass must lie in (0, 1)");
  return split;
}

double theta_weight(const SplitNoise& split, const std::vector<bool>& chi_path,
                    const std::vector<Vec>& z_path, double t) {
  if (!(split.delta > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("horizon must be positive");
  const auto steps = static_cast<std::size_t>(std::floor(t / split.delta + 1e-9));
  if (steps == 0) throw std::invalid_argument("horizon shorter than one step");
  if (chi_path.size() != steps || z_path.size() != steps)
    throw std::invalid_argument("paths must cover every grid point up to the horizon");
  if (!split.localize) return 1.0;

  std::size_t hits = 0;
  for (const bool c : chi_path) hits += c ? 1 : 0;
  if (static_cast<double>(hits) < 0.5 * split.m_star * static_cast<double>(steps)) return 0.0;

  const double radius = 0.5 * std::pow(split.delta, -0.25);
  double w = 1.0;
  for (const auto& z : z_path) {
    w *= bump(radius, z);
    if (w == 0.0) return 0.0;
  }
  return w;
}

RegularizedEstimate regularized_expectation(const SchemeSemigroup& sg, const SplitNoise& split,
                                            const Vec& x0, double t,
                                            const std::function<double(const Vec&)>& f,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            int workers) {
  if (!f) throw std::invalid_argument("need a payoff");
  if (x0.size() != sg.scheme.dim_x) throw std::invalid_argument("x0 dimension mismatch");
  if (split.base.dim != sg.noise.dim) throw std::invalid_argument("noise dimension mismatch");
  const double delta = sg.grid.step();
  if (!(std::abs(split.delta - delta) <= 1e-9 * delta))
    throw std::invalid_argument("splitting step size does not match the grid");
  const auto steps = static_cast<std::uint64_t>(sg.grid.index_of(t));
  if (steps == 0) throw std::invalid_argument("horizon shorter than one step");

  std::uint64_t work = 0;
  const auto sums = reduce_vector(
      n_samples, workers, 5,
      [&](std::uint64_t k, std::vector<double>& out) {
        rng::Stream stream = rng::Stream::derive(seed, k);
        Vec x = x0;
        std::vector<bool> chi_path(steps);
        std::vector<Vec> z_path(steps);
        for (std::uint64_t s = 0; s < steps; ++s) {
          const bool chi = split.sample_chi(stream);
          Vec z = chi ? split.sample_u_raw(stream) : split.sample_v_raw(stream);
          chi_path[s] = chi;
          z_path[s] = std::move(z);
          x = step(sg, x, z_path[s], delta, stream);
        }
        const double th = theta_weight(split, chi_path, z_path, t);
        const double val = f(x);
        out[0] = th * val;
        out[1] = th;
        out[2] = th * th * val * val;
        out[3] = th * th * val;
        out[4] = th * th;
        return steps;
      },
      work);

  const double s1 = sums[0], s2 = sums[1];
  if (!(s2 > 0.0)) throw std::runtime_error("localization annihilated the sample");

  // self-normalized ratio; delta-method standard error
  const double ratio = s1 / s2;
  const double resid = std::max(0.0, sums[2] - 2.0 * ratio * sums[3] + ratio * ratio * sums[4]);

  RegularizedEstimate out;
  out.estimate.mean = ratio;
  out.estimate.stderr_ = std::sqrt(resid) / s2;
  out.estimate.n_samples = n_samples;
  out.estimate.work = work;
  out.theta = moments_to_estimate(s2, sums[4], n_samples, work);
  return out;
}

MCEstimate convolved_expectation(const SchemeSemigroup& sg, double theta_exp, const Vec& x0,
                                 double t, const std::function<double(const Vec&)>& f,
                                 std::uint64_t n_samples, std::uint64_t seed, int workers) {
  if (!(theta_exp > 0.0)) throw std::invalid_argument("blur exponent must be positive");
  if (!f) throw std::invalid_argument("need a payoff");
  if (x0.size() != sg.scheme.dim_x) throw std::invalid_argument("x0 dimension mismatch");
  const double delta = sg.grid.step();
  const auto steps = static_cast<std::uint64_t>(sg.grid.index_of(t));
  if (steps == 0) throw std::invalid_argument("horizon shorter than one step");
  const double scale = std::pow(delta, theta_exp);

  return run_mc(n_samples, workers, [&](std::uint64_t k) {
    rng::Stream stream = rng::Stream::derive(seed, k);
    Vec x = x0;
    for (std::uint64_t s = 0; s < steps; ++s) x = step(sg, x, sg.noise.sample(stream), delta, stream);
    for (int d = 0; d < x.size(); ++d) x[d] += scale * stream.next_normal();
    return SampleResult{f(x), steps};
  });
}

DensityTable convolved_density(const OrderParams& params, const SchemeSemigroup& sg,
                               double theta_exp, const Vec& x0, const std::vector<double>& y_grid,
                               std::uint64_t n_samples, std::uint64_t seed, int workers) {
  if (!(theta_exp > 0.0)) throw std::invalid_argument("blur exponent must be positive");
  if (sg.scheme.dim_x != 1) throw std::invalid_argument("density table needs a 1D state");
  if (y_grid.empty()) throw std::invalid_argument("need at least one evaluation point");
  if (x0.size() != 1) throw std::invalid_argument("x0 dimension mismatch");
  {
    // validate the pairing before any thread starts
    QhatSampler probe(params, sg, seed, 0);
  }

  const double delta = params.grid.at_level(1).step();
  const double scale = std::pow(delta, theta_exp);
  const double norm = 1.0 / (scale * std::sqrt(kTwoPi));
  const std::size_t g = y_grid.size();

  std::uint64_t work = 0;
  const auto sums = reduce_vector(
      n_samples, workers, 2 * g,
      [&](std::uint64_t k, std::vector<double>& out) {
        QhatSampler sampler(params, sg, seed, k);
        sampler.run(x0, [&](const Vec& end, double coeff) {
          // exact smoothing kernel at the end state, no binning
          for (std::size_t j = 0; j < g; ++j) {
            const double d = (y_grid[j] - end[0]) / scale;
            out[j] += coeff * norm * std::exp(-0.5 * d * d);
          }
        });
        for (std::size_t j = 0; j < g; ++j) out[g + j] = out[j] * out[j];
        return sampler.work();
      },
      work);

  DensityTable table;
  table.n_samples = n_samples;
  table.work = work;
  table.rows.resize(g);
  for (std::size_t j = 0; j < g; ++j) {
    const MCEstimate e = moments_to_estimate(sums[j], sums[g + j], n_samples, 0);
    table.rows[j] = {y_grid[j], e.mean, e.stderr_};
  }
  return table;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("need two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double gap = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    // consume the full tie group so equal values never register a gap
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    gap = std::max(gap, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return gap;
}

}  // namespace semiboost
