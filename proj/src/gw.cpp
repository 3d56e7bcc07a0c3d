// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/gw.hpp"

#include <cmath>
#include <string>

namespace rangeperc {

namespace {
void validate(const GwParams& params) {
  if (params.N < 1) throw GwError("GW offspring: N must be >= 1");
  if (!(params.q >= 0.0 && params.q <= 1.0)) throw GwError("GW offspring: q must be in [0, 1]");
}
}  // namespace

std::vector<long double> survival_orbit(const GwParams& params, std::int64_t k) {
  validate(params);
  if (k < 0) throw GwError("survival_orbit: k must be >= 0");
  const long double q = params.q;
  const long double n = static_cast<long double>(params.N);
  std::vector<long double> u;
  u.reserve(static_cast<std::size_t>(k + 1));
  u.push_back(1.0L);
  for (std::int64_t j = 0; j < k; ++j) {
    const long double prev = u.back();
    // 1 - f(1 - u) with f(s) = (1 - q + q s)^N.
    const long double next = q * prev >= 1.0L ? 1.0L : -std::expm1(n * std::log1p(-q * prev));
    u.push_back(next);
  }
  return u;
}

long double survival_prob(const GwParams& params, std::int64_t k) {
  return survival_orbit(params, k).back();
}

double edge_survival_bound(double C) {
  if (!(C > 0.0)) throw GwError("edge_survival_bound: C must be positive");
  return 4.0 * C / -std::expm1(-C);
}

std::vector<SurvivalBoundRow> survival_bound_check(double C, std::span<const GwScheduleEntry> schedule,
                                      double slack) {
  const double bound = edge_survival_bound(C);
  constexpr double kTol = 1e-12;
  std::vector<SurvivalBoundRow> rows;
  for (const auto& e : schedule) {
    if (e.k < 1) throw GwError("survival_bound_check: k must be >= 1");
    const GwParams gp{e.N, e.q};
    validate(gp);
    const double m = gp.mean();
    if (e.q > 0.5) throw GwError("survival_bound_check: q_k > 1/2 at k=" + std::to_string(e.k));
    if (m < 1.0 - kTol || m > 1.0 + C / static_cast<double>(e.k) + kTol) {
      throw GwError("survival_bound_check: N_k q_k outside [1, 1 + C/k] at k=" + std::to_string(e.k));
    }
    SurvivalBoundRow row;
    row.k = e.k;
    row.N = e.N;
    row.q = e.q;
    row.mean = m;
    row.survival = survival_prob(gp, e.k);
    row.k_times_p = static_cast<double>(static_cast<long double>(e.k) * row.survival);
    row.bound = bound;
    row.limit = bound * (1.0 + slack);
    row.ok = row.k_times_p <= row.limit;
    rows.push_back(row);
  }
  return rows;
}

std::vector<GwScheduleEntry> edge_schedule(double C, std::int64_t N,
                                           std::span<const std::int64_t> ks) {
  std::vector<GwScheduleEntry> out;
  for (auto k : ks) {
    out.push_back({k, N, (1.0 + C / static_cast<double>(k)) / static_cast<double>(N)});
  }
  return out;
}

}  // namespace rangeperc
