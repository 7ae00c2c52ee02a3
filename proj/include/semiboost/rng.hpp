// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace semiboost::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// SplitMix64 finalizer (Stafford mix 13).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (mix64(v) + kGolden + (h << 6) + (h >> 2)));
}

/// Counter-based pseudo-random stream.  Draw k of the stream with key K is
/// mix64(K + (k+1) * golden); streams with distinct keys are independent
/// for all practical purposes and any draw is reproducible from (key, k)
/// alone, independent of thread scheduling.
class Stream {
 public:
  struct AuditEvent {
    std::uint64_t key;
    std::uint64_t counter;
  };

  /// When set (per thread), every raw draw is appended to the sink.
  inline static thread_local std::vector<AuditEvent>* audit_sink = nullptr;

  explicit Stream(std::uint64_t key) : key_(key) {}

  /// Stream keyed by (seed, a, b); used to give each Monte Carlo sample
  /// and each simulation branch its own stream.
  static Stream derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return Stream(hash_combine(hash_combine(mix64(seed), a), b));
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64() {
    const std::uint64_t v = mix64(key_ + (++counter_) * kGolden);
    if (audit_sink) audit_sink->push_back({key_, counter_});
    return v;
  }

  /// Uniform on the open interval (0, 1).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes exactly two raw draws.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace semiboost::rng
