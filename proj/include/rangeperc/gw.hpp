// SPDX-License-Identifier: Apache-2.0
//
// Galton-Watson analytics for Binomial(N, q) offspring.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rangeperc {

class GwError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GwParams {
  std::int64_t N = 1;
  double q = 0.0;

  double mean() const { return static_cast<double>(N) * q; }
  double variance() const { return static_cast<double>(N) * q * (1.0 - q); }
};

/// u_j = P(X_j > 0) for j = 0..k, iterating u <- 1 - (1 - q u)^N in long
/// double through log1p/expm1 so that nothing cancels as u -> 0.
std::vector<long double> survival_orbit(const GwParams& params, std::int64_t k);

/// P(X_k > 0) from a single ancestor.
long double survival_prob(const GwParams& params, std::int64_t k);

/// 4C / (1 - e^{-C}); throws GwError for C <= 0.
double edge_survival_bound(double C);

struct GwScheduleEntry {
  std::int64_t k = 0;
  std::int64_t N = 0;
  double q = 0.0;
};

struct SurvivalBoundRow {
  std::int64_t k = 0;
  std::int64_t N = 0;
  double q = 0.0;
  double mean = 0.0;
  long double survival = 0.0L;
  double k_times_p = 0.0;
  double bound = 0.0;   // K(C)
  double limit = 0.0;   // K(C) (1 + slack)
  bool ok = true;
};

/// k * P(X^(k)_k > 0) against K(C) for each schedule entry. Every entry must
/// satisfy q <= 1/2 and 1 <= N q <= 1 + C/k, else GwError.
std::vector<SurvivalBoundRow> survival_bound_check(double C, std::span<const GwScheduleEntry> schedule,
                                      double slack = 0.05);

/// Schedule N_k = N, q_k = (1 + C/k) / N for each k.
std::vector<GwScheduleEntry> edge_schedule(double C, std::int64_t N,
                                           std::span<const std::int64_t> ks);

}  // namespace rangeperc
