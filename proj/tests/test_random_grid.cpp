// SPDX-License-Identifier: MIT
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "doctest.h"
#include "semiboost/expansion.hpp"
#include "semiboost/random_grid.hpp"

using namespace semiboost;

namespace {

MatrixSemigroup two_state() {
  MatrixSemigroup sg;
  sg.generator.resize(2, 2);
  sg.generator << -1.0, 1.0, 1.0, -1.0;
  return sg;
}

double chain_f(const Vec& x, const Eigen::VectorXd& values) {
  const int top = static_cast<int>(values.size()) - 1;
  return values[std::clamp(static_cast<int>(std::lround(x[0])), 0, top)];
}

}  // namespace

TEST_SUITE("random-grid") {

TEST_CASE("binomial counts and lexicographic unranking") {
  CHECK(binomial_count(4, 0) == 1);
  CHECK(binomial_count(4, 2) == 6);
  CHECK(binomial_count(0, 0) == 1);
  CHECK_THROWS_AS(binomial_count(-1, 0), std::invalid_argument);
  CHECK_THROWS_AS(binomial_count(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(binomial_count(70, 35), std::overflow_error);

  const auto combos = combinations(4, 2);
  REQUIRE(combos.size() == 6);
  for (std::size_t r = 0; r < combos.size(); ++r) {
    const auto tuple = unrank_tuple(4, 2, r);
    REQUIRE(tuple.size() == 2);
    CHECK(tuple[0] == combos[r][0]);
    CHECK(tuple[1] == combos[r][1]);
  }
  CHECK_THROWS_AS(unrank_tuple(4, 2, 6), std::out_of_range);
  CHECK(unrank_tuple(3, 0, 0).empty());
}

TEST_CASE("grid draws: bounds, weights, exact importance identity") {
  rng::Stream s = rng::Stream::derive(2024, 0);
  const GridDraw none = sample_grid(4, 0, s);
  CHECK(none.times.empty());
  CHECK(none.weight == 1.0);
  const GridDraw full = sample_grid(3, 3, s);
  CHECK(full.times == std::vector<std::int64_t>{1, 2, 3});
  CHECK(full.weight == 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const GridDraw d = sample_grid(4, 2, s);
    CHECK(d.weight == 6.0);
    REQUIRE(d.times.size() == 2);
    CHECK(d.times[0] >= 1);
    CHECK(d.times[0] < d.times[1]);
    CHECK(d.times[1] <= 4);
  }
  CHECK_THROWS_AS(sample_grid(4, 5, s), std::invalid_argument);
  CHECK_THROWS_AS(sample_grid(-1, 0, s), std::invalid_argument);

  // weight / count cancels exactly, so the weighted enumeration equals
  // the deterministic sum over all tuples with no rounding slack
  for (const auto& [M, i] : {std::pair{4, 2}, std::pair{4, 1}, std::pair{3, 2}}) {
    const std::uint64_t count = binomial_count(M, i);
    const double weight = sample_grid(M, i, s).weight;
    CHECK(weight == static_cast<double>(count));
    double weighted = 0.0, plain = 0.0;
    for (std::uint64_t r = 0; r < count; ++r) {
      const auto t = unrank_tuple(M, i, r);
      double g = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j)
        g += static_cast<double>(t[j]) * static_cast<double>(j + 1);
      weighted += (weight / static_cast<double>(count)) * g;
      plain += g;
    }
    CHECK(weighted == plain);
  }
}

TEST_CASE("tuple draws are uniform") {
  rng::Stream s = rng::Stream::derive(77, 1);
  int counts[4] = {0, 0, 0, 0};
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) {
    const GridDraw d = sample_grid(4, 1, s);
    ++counts[d.times[0] - 1];
  }
  const double expect = reps / 4.0;
  const double band = 3.0 * std::sqrt(reps * 0.25 * 0.75);
  for (int j = 0; j < 4; ++j) CHECK(std::abs(counts[j] - expect) <= band);
}

TEST_CASE("chain embedding: identity at zero step, exact one-step law") {
  const MatrixSemigroup msg = two_state();
  const GridSpec grid{1.0, 4, 0};
  const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
  Vec x(1);
  x[0] = 1.0;
  CHECK(sg.scheme.psi(0.0, x, Vec::Zero(1), 0.0)[0] == 1.0);

  // one-step law from state 0 at delta = 1/4 is the Euler row:
  // P(0 -> 1) = delta * A(0, 1) = 1/4
  const double delta = 0.25;
  rng::Stream s = rng::Stream::derive(5, 5);
  Vec x0(1);
  x0[0] = 0.0;
  int hits = 0;
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) {
    const Vec y = step(sg, x0, sg.noise.sample(s), delta, s);
    if (std::lround(y[0]) == 1) ++hits;
  }
  const double band = 3.0 * std::sqrt(reps * 0.25 * 0.75);
  CHECK(std::abs(hits - reps * 0.25) <= band);

  // an over-large step is rejected rather than silently biased
  Vec z(1);
  z[0] = 0.3;
  CHECK_THROWS_AS(step(sg, x0, z, 1.5), std::runtime_error);
}

TEST_CASE("estimator mean matches the exact matrix evaluation") {
  const MatrixSemigroup msg = random_generator(3, 7);
  Eigen::VectorXd values(3);
  values << 0.0, 1.0, 0.25;
  Vec x0(1);
  x0[0] = 1.0;
  const auto f = [&](const Vec& x) { return chain_f(x, values); };
  for (const int nu : {1, 2}) {
    for (const int n : {2, 4}) {
      const GridSpec grid{1.0, n, 0};
      const OrderParams params{1, 2, nu, grid};
      const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
      const double exact = boosted_transition(msg, params).row(1).dot(values);
      for (const std::uint64_t seed : {11ull, 12ull, 13ull}) {
        const MCEstimate est = estimate_qhat(params, sg, x0, f, 200000, seed, 2);
        CHECK(est.stderr_ > 0.0);
        CHECK(std::abs(est.mean - exact) <= 4.0 * est.stderr_);
      }
    }
  }
}

TEST_CASE("third-order estimator stays unbiased") {
  const MatrixSemigroup msg = two_state();
  const GridSpec grid{1.0, 2, 0};
  const OrderParams params{1, 2, 3, grid};
  const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
  Eigen::VectorXd values(2);
  values << 1.0, 0.0;
  const double exact = boosted_transition(msg, params).row(0).dot(values);
  Vec x0(1);
  x0[0] = 0.0;
  const auto f = [&](const Vec& x) { return chain_f(x, values); };
  const MCEstimate est = estimate_qhat(params, sg, x0, f, 60000, 21, 2);
  CHECK(std::abs(est.mean - exact) <= 5.0 * est.stderr_);
}

TEST_CASE("orders zero and one reduce to plain fine-scheme Monte Carlo") {
  const MatrixSemigroup msg = two_state();
  const int n = 4;
  const GridSpec grid{1.0, n, 0};
  const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
  Eigen::VectorXd values(2);
  values << 1.0, 0.0;
  Vec x0(1);
  x0[0] = 0.0;
  const auto f = [&](const Vec& x) { return chain_f(x, values); };

  Eigen::MatrixXd pw = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd fine = base_step(msg, grid.at_level(1).step());
  for (int j = 0; j < n; ++j) pw = pw * fine;
  const double exact = pw.row(0).dot(values);

  for (const int nu : {0, 1}) {
    const OrderParams params{1, 1, nu, grid};
    const MCEstimate est = estimate_qhat(params, sg, x0, f, 50000, 3 + nu, 1);
    CHECK(est.work == static_cast<std::uint64_t>(n) * est.n_samples);
    CHECK(std::abs(est.mean - exact) <= 4.0 * est.stderr_);
  }

  const OrderParams params{1, 1, 1, grid};
  QhatSampler one(params, sg, 9, 0);
  int leaf_count = 0;
  one.run(x0, [&](const Vec&, double c) {
    ++leaf_count;
    CHECK(c == 1.0);
  });
  CHECK(leaf_count == 1);
  CHECK(one.branches() == 1);
  CHECK(one.work() == static_cast<std::uint64_t>(n));
}

TEST_CASE("stream audit: disjoint branch streams, shared prefix only") {
  const MatrixSemigroup msg = two_state();
  const int n = 4;
  const GridSpec grid{1.0, n, 0};
  const OrderParams params{1, 2, 2, grid};
  const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
  Vec x0(1);
  x0[0] = 0.0;

  std::vector<rng::Stream::AuditEvent> events;
  rng::Stream::audit_sink = &events;
  QhatSampler sampler(params, sg, 99, 7);
  sampler.run(x0, [](const Vec&, double) {});
  rng::Stream::audit_sink = nullptr;

  // every raw draw is attributable to a unique (stream, counter) slot
  std::set<std::pair<std::uint64_t, std::uint64_t>> slots;
  for (const auto& e : events) slots.insert({e.key, e.counter});
  CHECK(slots.size() == events.size());

  // chain noise costs one draw per step, so non-coordinator draws == work
  const std::uint64_t coord_key = rng::Stream::derive(99, 7, 0).key();
  std::size_t coord_draws = 0;
  std::set<std::uint64_t> seen_keys;
  for (const auto& e : events) {
    if (e.key == coord_key)
      ++coord_draws;
    else
      seen_keys.insert(e.key);
  }
  CHECK(coord_draws >= 1);
  CHECK(events.size() - coord_draws == sampler.work());

  // path draws come only from the derived branch family (seed, sample, b)
  std::set<std::uint64_t> branch_keys;
  for (std::uint64_t b = 1; b <= sampler.branches(); ++b)
    branch_keys.insert(rng::Stream::derive(99, 7, b).key());
  bool known = true;
  for (const std::uint64_t k : seen_keys) known = known && branch_keys.count(k) > 0;
  CHECK(known);
  CHECK(sampler.branches() == 6);  // fixed branching shape at order 2
  CHECK(sampler.leaves() == 3);

  // prefix sharing: per-sample work is 4n - t for the drawn correction
  // time t; re-simulating the prefix in each branch would make it the
  // constant 4n - 1 instead
  std::uint64_t lo = std::numeric_limits<std::uint64_t>::max(), hi = 0;
  for (std::uint64_t k = 0; k < 200; ++k) {
    QhatSampler probe(params, sg, 99, k);
    probe.run(x0, [](const Vec&, double) {});
    lo = std::min(lo, probe.work());
    hi = std::max(hi, probe.work());
  }
  CHECK(lo == static_cast<std::uint64_t>(3 * n));
  CHECK(hi == static_cast<std::uint64_t>(4 * n - 1));
}

TEST_CASE("seed and worker-count stability") {
  SchemeSemigroup sg;
  sg.scheme = make_ou_scheme(1.0, 1.0);
  sg.noise = gaussian_noise(1);
  sg.grid = {1.0, 2, 0};
  const OrderParams params{1, 1, 2, sg.grid};
  Vec x0(1);
  x0[0] = 1.0;
  const auto f = [](const Vec& x) { return x[0] * x[0]; };
  const MCEstimate a = estimate_qhat(params, sg, x0, f, 6000, 42, 1);
  const MCEstimate b = estimate_qhat(params, sg, x0, f, 6000, 42, 3);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.work == b.work);
  const MCEstimate c = estimate_qhat(params, sg, x0, f, 6000, 43, 1);
  CHECK(c.mean != a.mean);
}

TEST_CASE("estimator rejects bad inputs") {
  SchemeSemigroup sg;
  sg.scheme = make_ou_scheme(1.0, 1.0);
  sg.noise = gaussian_noise(1);
  sg.grid = {1.0, 2, 0};
  Vec x0(1);
  x0[0] = 0.0;
  const auto f = [](const Vec& x) { return x[0]; };
  OrderParams params{1, 1, 4, sg.grid};
  CHECK_THROWS_AS(estimate_qhat(params, sg, x0, f, 100, 1), std::invalid_argument);
  params.nu = -1;
  CHECK_THROWS_AS(estimate_qhat(params, sg, x0, f, 100, 1), std::invalid_argument);
  params.nu = 2;
  params.grid.refinement = 4;
  CHECK_THROWS_AS(estimate_qhat(params, sg, x0, f, 100, 1), std::invalid_argument);
  params.grid.refinement = 2;
  params.grid.level = 1;
  CHECK_THROWS_AS(estimate_qhat(params, sg, x0, f, 100, 1), std::invalid_argument);
  params.grid.level = 0;
  CHECK_THROWS_AS(estimate_qhat(params, sg, x0, f, 0, 1), std::invalid_argument);
  Vec wide(2);
  wide << 0.0, 0.0;
  CHECK_THROWS_AS(estimate_qhat(params, sg, wide, f, 100, 1), std::invalid_argument);
}

TEST_CASE("non-finite states propagate out of worker threads") {
  SchemeFunction bad;
  bad.dim_x = 1;
  bad.dim_z = 1;
  bad.psi = [](double, const Vec& x, const Vec&, double delta) {
    Vec out(1);
    out[0] = delta == 0.0 ? x[0] : std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  SchemeSemigroup sg;
  sg.scheme = bad;
  sg.noise = gaussian_noise(1);
  sg.grid = {1.0, 2, 0};
  const OrderParams params{1, 1, 1, sg.grid};
  Vec x0(1);
  x0[0] = 0.0;
  const auto f = [](const Vec& x) { return x[0]; };
  CHECK_THROWS_AS(estimate_qhat(params, sg, x0, f, 20000, 1, 3), std::runtime_error);
}

TEST_CASE("first-order study recovers the base-scheme rate on the chain") {
  const MatrixSemigroup msg = two_state();
  const GridSpec grid{1.0, 2, 0};
  const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
  const OrderParams params{1, 1, 1, grid};
  Eigen::VectorXd values(2);
  values << 1.0, 0.0;
  Vec x0(1);
  x0[0] = 0.0;
  const auto f = [&](const Vec& x) { return chain_f(x, values); };
  const double oracle = exact_transition(msg, 1.0).row(0).dot(values);
  const ConvergenceReport r = weak_error_study(params, sg, x0, f, oracle, {2, 4, 8}, 40000, 17, 2);
  REQUIRE(r.rows.size() == 3);
  CHECK_FALSE(r.noise_dominated);
  for (const auto& row : r.rows) CHECK(row.usable);
  CHECK(r.slope > 0.6);
  CHECK(r.slope < 1.5);
  CHECK(r.rows[0].abs_error > r.rows[1].abs_error);
  CHECK(r.rows[1].abs_error > r.rows[2].abs_error);

  // first-order sampling is the plain scheme: work per sample exactly n
  const auto table = work_accounting(r);
  REQUIRE(table.size() == 3);
  for (const auto& w : table) CHECK(w.steps_per_sample == static_cast<double>(w.n));
}

TEST_CASE("exact scheme self-comparison is flagged noise-dominated") {
  SchemeSemigroup sg;
  sg.scheme = make_brownian_scheme();
  sg.noise = gaussian_noise(1);
  sg.grid = {1.0, 2, 0};
  const OrderParams params{1, 1, 2, sg.grid};
  Vec x0(1);
  x0[0] = 0.0;
  // the scheme is exact at every n here, so deviations from E[X_1^2] = 1
  // are pure Monte Carlo noise
  const ConvergenceReport r = weak_error_study(
      params, sg, x0, [](const Vec& x) { return x[0] * x[0]; }, 1.0, {2, 4}, 4000, 6, 1);
  CHECK(r.noise_dominated);
  CHECK(std::isnan(r.slope));
  for (const auto& row : r.rows) CHECK_FALSE(row.usable);
}

TEST_CASE("second-order work grows near-linearly in n") {
  const MatrixSemigroup msg = two_state();
  const GridSpec grid{1.0, 2, 0};
  const SchemeSemigroup sg = make_chain_semigroup(msg, grid);
  const OrderParams params{1, 1, 2, grid};
  Eigen::VectorXd values(2);
  values << 1.0, 0.0;
  Vec x0(1);
  x0[0] = 0.0;
  const auto f = [&](const Vec& x) { return chain_f(x, values); };
  const double oracle = exact_transition(msg, 1.0).row(0).dot(values);
  const ConvergenceReport r =
      weak_error_study(params, sg, x0, f, oracle, {2, 4, 8, 16}, 3000, 23, 1);
  const auto table = work_accounting(r);
  REQUIRE(table.size() == 4);
  for (std::size_t j = 1; j < table.size(); ++j)
    CHECK(table[j].steps_per_sample / table[j - 1].steps_per_sample <= 2.6);

  ConvergenceReport empty;
  CHECK_THROWS_AS(work_accounting(empty), std::invalid_argument);
}

}  // TEST_SUITE
