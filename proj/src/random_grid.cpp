// SPDX-License-Identifier: MIT
#include "semiboost/random_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace semiboost {

std::uint64_t binomial_count(std::int64_t n, int k) {
  if (n < 0 || k < 0 || k > n)
    throw std::invalid_argument("binomial count needs 0 <= k <= n");
  const std::int64_t kk = std::min<std::int64_t>(k, n - k);
  std::uint64_t r = 1;
  // invariant: after round j, r == C(n - kk + j, j); the division is exact
  for (std::int64_t j = 1; j <= kk; ++j) {
    const auto num = static_cast<std::uint64_t>(n - kk + j);
    if (r > std::numeric_limits<std::uint64_t>::max() / num)
      throw std::overflow_error("tuple count overflows 64 bits");
    r = r * num / static_cast<std::uint64_t>(j);
  }
  return r;
}

std::vector<std::int64_t> unrank_tuple(std::int64_t M, int k, std::uint64_t rank) {
  if (rank >= binomial_count(M, k)) throw std::out_of_range("tuple rank out of range");
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(k));
  std::int64_t v = 1;
  std::uint64_t rem = rank;
  for (int j = k; j >= 1; --j) {
    // tuples whose next element is v continue in C(M - v, j - 1) ways
    for (;;) {
      const std::uint64_t c = binomial_count(M - v, j - 1);
      if (rem < c) break;
      rem -= c;
      ++v;
    }
    out.push_back(v);
    ++v;
  }
  return out;
}

GridDraw sample_grid(std::int64_t M, int i, rng::Stream& rng) {
  if (M < 0) throw std::invalid_argument("fine step count must be >= 0");
  if (i < 0 || i > M)
    throw std::invalid_argument("correction count " + std::to_string(i) + " outside 0.." +
                                std::to_string(M));
  const std::uint64_t count = binomial_count(M, i);
  if (count >= (1ull << 53))
    throw std::overflow_error("tuple count exceeds the exact double range");
  std::uint64_t rank = 0;
  if (count > 1) {
    // reject draws below 2^64 mod count, then reduce: exactly uniform
    const std::uint64_t residue = (0 - count) % count;
    std::uint64_t r = rng.next_u64();
    while (r < residue) r = rng.next_u64();
    rank = r % count;
  }
  return {i, unrank_tuple(M, i, rank), static_cast<double>(count)};
}

QhatSampler::QhatSampler(const OrderParams& params, const SchemeSemigroup& sg, std::uint64_t seed,
                         std::uint64_t sample)
    : params_(params),
      sg_(sg),
      seed_(seed),
      sample_(sample),
      coord_(rng::Stream::derive(seed, sample, 0)) {
  params_.validate();
  if (params_.nu > kMaxBoostOrder)
    throw std::invalid_argument("target order " + std::to_string(params_.nu) +
                                " above the supported cap of " + std::to_string(kMaxBoostOrder));
  if (params_.grid.level != 0)
    throw std::invalid_argument("the boosted step spans the whole horizon; level must be 0");
  if (params_.grid.horizon != sg_.grid.horizon || params_.grid.refinement != sg_.grid.refinement)
    throw std::invalid_argument("order parameters and scheme disagree on the grid family");
}

void QhatSampler::run(const Vec& x0, const Leaf& leaf) {
  if (x0.size() != sg_.scheme.dim_x)
    throw std::invalid_argument("initial state dimension mismatch");
  boosted_segment(params_.nu, 0, x0, 1.0, [&](const Vec& y, double c) {
    ++leaves_;
    leaf(y, c);
  });
}

Vec QhatSampler::fine_path(int level, Vec x, std::int64_t steps, rng::Stream& stream) {
  const double delta = params_.grid.at_level(level).step();
  for (std::int64_t s = 0; s < steps; ++s) {
    x = step(sg_, x, sg_.noise.sample(stream), delta, stream);
    ++work_;
  }
  return x;
}

void QhatSampler::boosted_segment(int order, int level, const Vec& x, double coeff,
                                  const Cont& done) {
  if (++depth_ > 64) throw std::runtime_error("boosted recursion exceeded depth 64");
  const int m = m_steps(level, order, params_.alpha);
  const int n = params_.grid.refinement;
  {
    rng::Stream s = fresh_stream();
    const Vec y = fine_path(level + 1, x, n, s);
    done(y, coeff);
  }
  // one uniformly drawn tuple per stratum, weighted by the tuple count
  for (int i = 1; i <= m - 1; ++i) {
    const int q = q_order(i, level, order, params_.alpha);
    const GridDraw draw = sample_grid(n, i, coord_);
    walk(q, level + 1, x, 0, draw.times, 0, coeff * draw.weight, done);
  }
  --depth_;
}

void QhatSampler::walk(int order, int fine, const Vec& x, std::int64_t pos,
                       const std::vector<std::int64_t>& times, std::size_t idx, double coeff,
                       const Cont& done) {
  rng::Stream s = fresh_stream();
  if (idx == times.size()) {
    const Vec y = fine_path(fine, x, params_.grid.refinement - pos, s);
    done(y, coeff);
    return;
  }
  const std::int64_t t = times[idx];
  const Vec fork = fine_path(fine, x, t - 1 - pos, s);
  // signed one-step difference: boosted continuation minus base
  // continuation, independent after the shared prefix state
  boosted_segment(order, fine, fork, coeff,
                  [&](const Vec& y, double c) { walk(order, fine, y, t, times, idx + 1, c, done); });
  rng::Stream sb = fresh_stream();
  const Vec base_y = fine_path(fine, fork, 1, sb);
  walk(order, fine, base_y, t, times, idx + 1, -coeff, done);
}

MCEstimate estimate_qhat(const OrderParams& params, const SchemeSemigroup& sg, const Vec& x0,
                         const std::function<double(const Vec&)>& f, std::uint64_t n_samples,
                         std::uint64_t seed, int workers) {
  if (!f) throw std::invalid_argument("missing integrand");
  if (x0.size() != sg.scheme.dim_x)
    throw std::invalid_argument("initial state dimension mismatch");
  // surface parameter errors before any thread is spawned
  { QhatSampler probe(params, sg, seed, 0); }
  return run_mc(n_samples, workers, [&](std::uint64_t k) {
    QhatSampler sampler(params, sg, seed, k);
    double acc = 0.0;
    sampler.run(x0, [&](const Vec& y, double c) { acc += c * f(y); });
    return SampleResult{acc, sampler.work()};
  });
}

ConvergenceReport weak_error_study(const OrderParams& params, const SchemeSemigroup& sg,
                                   const Vec& x0, const std::function<double(const Vec&)>& f,
                                   double oracle, const std::vector<int>& n_list,
                                   std::uint64_t samples, std::uint64_t seed, int workers) {
  if (n_list.size() < 2) throw std::invalid_argument("study needs at least two step counts");
  if (!std::isfinite(oracle)) throw std::invalid_argument("reference value must be finite");
  ConvergenceReport report;
  for (const int n : n_list) {
    if (n < 2) throw std::invalid_argument("refinement must be >= 2");
    OrderParams p = params;
    p.grid.refinement = n;
    p.grid.level = 0;
    SchemeSemigroup run_sg = sg;
    run_sg.grid = p.grid;
    const std::uint64_t run_seed =
        rng::hash_combine(rng::mix64(seed), static_cast<std::uint64_t>(n));
    const MCEstimate est = estimate_qhat(p, run_sg, x0, f, samples, run_seed, workers);

    StudyRow row;
    row.n = n;
    row.estimate = est.mean;
    row.stderr_ = est.stderr_;
    row.exact = oracle;
    row.abs_error = std::abs(est.mean - oracle);
    row.usable = est.stderr_ < row.abs_error / 2.0;
    row.work_per_sample = static_cast<double>(est.work) / static_cast<double>(est.n_samples);
    row.samples = est.n_samples;
    report.rows.push_back(row);
  }
  finalize_report(report);
  return report;
}

std::vector<WorkRow> work_accounting(const ConvergenceReport& report) {
  if (report.rows.empty()) throw std::invalid_argument("work accounting needs a non-empty report");
  std::vector<WorkRow> out;
  out.reserve(report.rows.size());
  for (const auto& r : report.rows) {
    if (!(r.work_per_sample > 0.0))
      throw std::invalid_argument("report rows carry no work accounting");
    out.push_back({r.n, r.work_per_sample});
  }
  return out;
}

SchemeSemigroup make_chain_semigroup(const MatrixSemigroup& chain, const GridSpec& grid) {
  chain.validate();
  grid.validate();
  const Eigen::MatrixXd a = chain.generator;
  const int states = chain.states();
  const double max_diag = a.diagonal().cwiseAbs().maxCoeff();

  SchemeFunction s;
  s.dim_x = 1;
  s.dim_z = 1;
  s.declared_order = 0;
  s.psi = [a, states, max_diag](double, const Vec& x, const Vec& y, double delta) {
    Vec out(1);
    if (delta == 0.0) {  // stepless evaluation is the identity
      out[0] = x[0];
      return out;
    }
    if (delta * max_diag > 1.0 + 1e-12)
      throw std::runtime_error("step size leaves the Euler chain step substochastic");
    const int row = std::clamp(static_cast<int>(std::lround(x[0])), 0, states - 1);
    const double u = y[0] / std::sqrt(delta);  // undo the sqrt(delta) noise scaling
    double cum = 0.0;
    int next_state = states - 1;
    for (int j = 0; j < states; ++j) {
      cum += (row == j ? 1.0 : 0.0) + delta * a(row, j);
      if (u <= cum) {
        next_state = j;
        break;
      }
    }
    out[0] = next_state;
    return out;
  };

  NoiseLaw noise;
  noise.dim = 1;
  noise.name = "uniform01";
  noise.sample = [](rng::Stream& st) {
    Vec z(1);
    z[0] = st.next_uniform();
    return z;
  };

  SchemeSemigroup out;
  out.scheme = std::move(s);
  out.noise = std::move(noise);
  out.grid = grid;
  return out;
}

}  // namespace semiboost
