// SPDX-License-Identifier: MIT
#include "semiboost/estimate.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>
#include <vector>

namespace semiboost {

namespace {

constexpr std::uint64_t kBlock = 4096;

struct BlockSum {
  double v = 0.0;
  double v2 = 0.0;
  std::uint64_t work = 0;
};

}  // namespace

MCEstimate run_mc(std::uint64_t n_samples, int workers,
                  const std::function<SampleResult(std::uint64_t)>& sample) {
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");
  if (workers < 1) throw std::invalid_argument("need at least one worker");

  const std::uint64_t n_blocks = (n_samples + kBlock - 1) / kBlock;
  std::vector<BlockSum> blocks(n_blocks);

  auto run_block = [&](std::uint64_t b) {
    Neumaier v, v2;
    std::uint64_t work = 0;
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(n_samples, lo + kBlock);
    for (std::uint64_t k = lo; k < hi; ++k) {
      const SampleResult r = sample(k);
      v.add(r.value);
      v2.add(r.value * r.value);
      work += r.work;
    }
    blocks[b] = {v.value(), v2.value(), work};
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

  Neumaier v, v2;
  std::uint64_t work = 0;
  for (const auto& b : blocks) {
    v.add(b.v);
    v2.add(b.v2);
    work += b.work;
  }

  MCEstimate out;
  out.n_samples = n_samples;
  out.work = work;
  const auto n = static_cast<double>(n_samples);
  out.mean = v.value() / n;
  if (n_samples > 1) {
    const double ss = std::max(0.0, v2.value() - n * out.mean * out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

}  // namespace semiboost
