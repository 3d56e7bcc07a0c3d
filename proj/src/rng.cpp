// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/rng.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rangeperc {

namespace {
__extension__ using u128 = unsigned __int128;
}  // namespace

StreamRng::StreamRng(std::uint64_t master_seed, std::uint64_t trial_index, std::uint64_t tag)
    : key_(mix64(mix64(mix64(master_seed ^ 0x243f6a8885a308d3ULL) ^ trial_index) ^
                 (tag * 0x13198a2e03707344ULL))) {}

std::uint64_t StreamRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("StreamRng::below: empty range");
  // Lemire's nearly-divisionless method.
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

namespace {

std::int64_t binomial_inversion(StreamRng& rng, std::int64_t n, double p) {
  const double q = 1.0 - p;
  const double ratio = p / q;
  double pk = std::pow(q, static_cast<double>(n));
  double cdf = pk;
  const double u = rng.uniform01();
  std::int64_t k = 0;
  while (u >= cdf && k < n) {
    pk *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += pk;
  }
  return k;
}

std::int64_t binomial_waiting_times(StreamRng& rng, std::int64_t n, double p) {
  const double log_q = std::log1p(-p);
  std::int64_t successes = 0;
  std::int64_t position = 0;
  for (;;) {
    const double u = 1.0 - rng.uniform01();  // (0, 1]
    const double gap = std::floor(std::log(u) / log_q);
    if (gap >= static_cast<double>(n - position)) break;
    position += static_cast<std::int64_t>(gap) + 1;
    ++successes;
    if (position >= n) break;
  }
  return successes;
}

}  // namespace

std::int64_t sample_binomial(StreamRng& rng, std::int64_t n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("sample_binomial: need n >= 0 and p in [0, 1]");
  }
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - sample_binomial(rng, n, 1.0 - p);
  if (static_cast<double>(n) * p <= 30.0) return binomial_inversion(rng, n, p);
  return binomial_waiting_times(rng, n, p);
}

void sample_distinct(StreamRng& rng, std::int64_t n, std::int64_t m,
                     std::vector<std::int64_t>& out) {
  if (m < 0 || m > n) throw std::invalid_argument("sample_distinct: need 0 <= m <= n");
  out.clear();
  if (m == 0) return;
  const auto un = static_cast<std::uint64_t>(n);
  if (2 * m > n) {
    std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), std::int64_t{0});
    for (std::int64_t i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::int64_t>(rng.below(un - static_cast<std::uint64_t>(i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    out.assign(pool.begin(), pool.begin() + m);
    return;
  }
  if (m <= 32) {
    while (static_cast<std::int64_t>(out.size()) < m) {
      const auto j = static_cast<std::int64_t>(rng.below(un));
      if (std::find(out.begin(), out.end(), j) == out.end()) out.push_back(j);
    }
    return;
  }
  absl::flat_hash_set<std::int64_t> seen;
  seen.reserve(static_cast<std::size_t>(m));
  while (static_cast<std::int64_t>(out.size()) < m) {
    const auto j = static_cast<std::int64_t>(rng.below(un));
    if (seen.insert(j).second) out.push_back(j);
  }
}

}  // namespace rangeperc
