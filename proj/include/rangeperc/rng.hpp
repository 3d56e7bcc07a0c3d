// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams. Every stream is a pure function of
// (master_seed, trial_index, tag); draw i of a stream is mix(key, i), so
// streams never share state and replay bit-exactly on any platform.

#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace rangeperc {

/// 64-bit avalanche finalizer (the splitmix64 output function).
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Top 53 bits as a double in [0, 1).
constexpr double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Well-known stream tags; any other value is also a valid tag.
enum class StreamTag : std::uint64_t {
  kAggregate = 1,
  kBranching = 2,
  kCoupledFill = 3,
  kWalk = 4,
  kReplay = 5,
  kGaltonWatson = 6,
};

class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t master_seed, std::uint64_t trial_index, std::uint64_t tag);
  StreamRng(std::uint64_t master_seed, std::uint64_t trial_index, StreamTag tag)
      : StreamRng(master_seed, trial_index, static_cast<std::uint64_t>(tag)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

  double uniform01() { return to_unit((*this)()); }

  /// Uniform integer in [0, n), exact (multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Exact Binomial(n, p) draw. Inversion by the pmf recurrence when the mean
/// of the smaller tail is at most 30, otherwise counting geometric waiting
/// times between successes.
std::int64_t sample_binomial(StreamRng& rng, std::int64_t n, double p);

/// m distinct indices from [0, n), uniform over ordered m-tuples.
/// Rejection for small m, partial Fisher-Yates when m > n/2.
void sample_distinct(StreamRng& rng, std::int64_t n, std::int64_t m,
                     std::vector<std::int64_t>& out);

}  // namespace rangeperc
