// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "semiboost/estimate.hpp"
#include "semiboost/matrix_semigroup.hpp"
#include "semiboost/order_params.hpp"
#include "semiboost/report.hpp"
#include "semiboost/rng.hpp"
#include "semiboost/scheme.hpp"

namespace semiboost {

/// Uniformly drawn correction tuple on a segment of M fine steps.  Under
/// the uniform tuple law, weight * P(tuple) = 1, so weighting one draw is
/// an unbiased surrogate for the sum over all tuples.
struct GridDraw {
  int i = 0;
  std::vector<std::int64_t> times;  ///< sorted, values in 1..M
  double weight = 1.0;              ///< binomial(M, i)
};

/// C(n, k) as an exact 64-bit count; throws on overflow.
std::uint64_t binomial_count(std::int64_t n, int k);

/// rank-th k-subset of {1..M} in lexicographic order.
std::vector<std::int64_t> unrank_tuple(std::int64_t M, int k, std::uint64_t rank);

/// Exactly uniform draw among the C(M, i) increasing tuples, by rejection
/// sampling on the lexicographic rank; weight is the tuple count.
GridDraw sample_grid(std::int64_t M, int i, rng::Stream& rng);

/// Largest target order accepted by the sampler.  Branch counts grow with
/// the order; orders 1..3 are the verified range.
inline constexpr int kMaxBoostOrder = 3;

/// One-sample realization of the boosted whole-horizon step as a signed
/// branching simulation.
///
/// Each path segment between branch points runs on its own derived stream
/// (seed, sample, branch id); tuple draws come from a separate coordinator
/// stream.  At a correction time the two sides of the difference factor
/// share the simulated prefix state and nothing afterwards.  Given (seed,
/// sample) the whole branching tree is reproducible bit for bit.
class QhatSampler {
 public:
  /// Called once per terminal branch with the end state and the signed
  /// coefficient of that branch (sign times accumulated tuple weights).
  using Leaf = std::function<void(const Vec&, double)>;

  QhatSampler(const OrderParams& params, const SchemeSemigroup& sg, std::uint64_t seed,
              std::uint64_t sample);
  // the sampler keeps references; temporaries would dangle
  QhatSampler(OrderParams&&, const SchemeSemigroup&, std::uint64_t, std::uint64_t) = delete;
  QhatSampler(const OrderParams&, SchemeSemigroup&&, std::uint64_t, std::uint64_t) = delete;

  /// Simulates one draw of the boosted step over [0, T] from x0.
  void run(const Vec& x0, const Leaf& leaf);

  std::uint64_t work() const { return work_; }        ///< elementary scheme steps
  std::uint64_t branches() const { return branch_; }  ///< derived segment streams
  std::uint64_t leaves() const { return leaves_; }

 private:
  using Cont = std::function<void(const Vec&, double)>;

  rng::Stream fresh_stream() { return rng::Stream::derive(seed_, sample_, ++branch_); }
  Vec fine_path(int level, Vec x, std::int64_t steps, rng::Stream& stream);
  void boosted_segment(int order, int level, const Vec& x, double coeff, const Cont& done);
  void walk(int order, int fine, const Vec& x, std::int64_t pos,
            const std::vector<std::int64_t>& times, std::size_t idx, double coeff,
            const Cont& done);

  const OrderParams& params_;
  const SchemeSemigroup& sg_;
  std::uint64_t seed_;
  std::uint64_t sample_;
  rng::Stream coord_;
  std::uint64_t work_ = 0;
  std::uint64_t branch_ = 0;
  std::uint64_t leaves_ = 0;
  int depth_ = 0;
};

/// Unbiased Monte Carlo estimate of the boosted expectation over [0, T]
/// started at x0.  With no correction strata (nu <= 1 at level 0) this is
/// plain fine-scheme Monte Carlo.  The estimate is a pure function of
/// (seed, n_samples) for any worker count.
MCEstimate estimate_qhat(const OrderParams& params, const SchemeSemigroup& sg, const Vec& x0,
                         const std::function<double(const Vec&)>& f, std::uint64_t n_samples,
                         std::uint64_t seed, int workers = 1);

/// Error-vs-n study against a fixed reference value: one estimate per
/// entry of n_list (grid refinement overridden per run, fresh sub-seed per
/// n), slope fitted on the usable rows.
ConvergenceReport weak_error_study(const OrderParams& params, const SchemeSemigroup& sg,
                                   const Vec& x0, const std::function<double(const Vec&)>& f,
                                   double oracle, const std::vector<int>& n_list,
                                   std::uint64_t samples, std::uint64_t seed, int workers = 1);

struct WorkRow {
  std::int64_t n = 0;
  double steps_per_sample = 0.0;
};

/// Mean elementary steps per sample by n, for the near-linear-cost check.
std::vector<WorkRow> work_accounting(const ConvergenceReport& report);

/// Finite-state chain as a simulable scheme: the state holds the index,
/// one step inverse-cdf samples the Euler transition row, so the step law
/// is exactly the Euler chain step and matrix products give exact
/// expectations to test Monte Carlo against.
SchemeSemigroup make_chain_semigroup(const MatrixSemigroup& chain, const GridSpec& grid);

}  // namespace semiboost
