// SPDX-License-Identifier: Apache-2.0
//
// Survival estimates, the stochastic bisection for lambda_c, mean |eta_k|
// curves, and the interference diagnostics of the extinction argument.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rangeperc/epidemic.hpp"
#include "rangeperc/lattice.hpp"

namespace rangeperc {

class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurvivalStats {
  double lambda = 0.0;
  std::int64_t trials = 0;
  std::int64_t survivals = 0;
  double q_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
};

SurvivalStats make_survival_stats(double lambda, std::int64_t trials, std::int64_t survivals);

struct SurvivalOptions {
  StepMode mode = StepMode::kBondExact;
  unsigned workers = 0;  // 0: default_workers()
  std::int64_t first_trial = 0;
};

/// Trials first_trial .. first_trial+trials-1 from eta_0 = {origin} at
/// p = lambda / V(R); a trial survives when the stop rule fires first.
/// Throws EstimatorError for lambda outside (0, V(R)] or trials < 1.
SurvivalStats estimate_survival(const LatticeParams& params, double lambda, const StopRule& stop,
                                std::int64_t trials, std::uint64_t seed,
                                const SurvivalOptions& options = {});

/// Survival flags for a range of trial indices (1 = survived).
std::vector<std::uint8_t> survival_flags(const LatticeParams& params, double lambda,
                                         const StopRule& stop, std::int64_t first_trial,
                                         std::int64_t count, std::uint64_t seed,
                                         const SurvivalOptions& options = {});

struct BisectionConfig {
  double theta_max = 8.0;
  /// Survival floor. Unset: q_floor_scaled / R^(d-1).
  std::optional<double> q_floor;
  double q_floor_scaled = 1.0;
  /// Final bracket width in theta units; lambda tolerance is tol / R^(d-1).
  double theta_tol = 0.05;
  std::int64_t trials_per_point = 100;      // first look at each point
  std::int64_t max_trials_per_point = 6400;  // escalation ceiling
  std::int64_t trial_budget = 400'000;       // over the whole bisection
  StepMode mode = StepMode::kBondExact;
  unsigned workers = 0;

  double floor_for(const LatticeParams& params) const;
};

enum class PointClass { kSubcritical, kSupercritical };

struct BisectionPoint {
  SurvivalStats stats;
  PointClass cls = PointClass::kSubcritical;
  bool ambiguous = false;  // CI still straddled the floor; classified by q_hat
};

struct CriticalEstimate {
  int d = 0;
  int R = 0;
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double lambda_c_hat = 0.0;
  double theta_hat = 0.0;
  double bracket_width = 0.0;  // theta units
  double q_floor = 0.0;
  std::int64_t trials_per_point = 0;
  std::int64_t trials_total = 0;
  StopRule stop;
  std::uint64_t seed = 0;
  bool budget_exhausted = false;
  bool top_subcritical = false;  // no point in the bracket looked supercritical
  std::vector<BisectionPoint> path;

  bool theta_positive() const { return theta_hat > 0.0; }
};

/// Stochastic bisection over [1, 1 + theta_max / R^(d-1)] (clipped to V(R)).
/// All points share the seed, so survival is monotone in lambda trial by
/// trial. Throws EstimatorError when lambda = 1 already classifies as
/// supercritical, which means the caps are too small.
CriticalEstimate estimate_lambda_c(const LatticeParams& params, const BisectionConfig& config,
                                   const StopRule& stop, std::uint64_t seed);

struct MeanEtaPoint {
  std::int64_t k = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct MeanEtaCurve {
  double theta = 0.0;
  int R = 0;
  std::int64_t k_max = 0;
  std::int64_t trials = 0;
  std::vector<MeanEtaPoint> means;  // k = 0..k_max
  std::optional<std::int64_t> dip_k;
};

/// Mean |eta_k| for k <= k_max (default R^(d-1) + 1) over iid trials from
/// {origin}. Rejects theta <= 0 (lambda < 1) and theta > 1.
MeanEtaCurve mean_eta_curve(const LatticeParams& params, double theta,
                            std::optional<std::int64_t> k_max, std::int64_t trials,
                            std::uint64_t seed, unsigned workers = 0);

struct InterferenceRow {
  std::int64_t n = 0;
  std::int64_t rho = 0;        // |rho_{n+1}|
  std::int64_t outside = 0;    // |rho_{n+1} ∩ I_n^c|
  std::int64_t zeta = 0;       // |(rho_{n+1} \ A_n) ∩ I_n|
  std::int64_t a_inside = 0;   // |A_n ∩ I_n|
  std::int64_t a_outside = 0;  // |A_n ∩ I_n^c|
  double signed_term = 0.0;    // eps (outside + zeta - 2 a_inside)
  double tau_sum = 0.0;        // pairs with tau(y) <= tau(x), weight 1/V
  double full_sum = 0.0;       // all neighbouring pairs in rho_{n+1}, weight 1/V
};

struct InterferenceReport {
  double K = 3.0;
  double epsilon = 0.0;
  std::vector<InterferenceRow> rows;  // n = 0..n_max

  bool tau_bound_holds() const;
  bool partition_holds() const;
};

/// Exact set sizes for one realized trial. rho_{n+1} is the set of sites
/// with tau <= n; I_n has half-width K sqrt(n) R in lattice units. Throws
/// EstimatorError on an empty record list.
InterferenceReport interference_report(std::span<const InfectionRecord> records, double theta,
                                       double K, std::int64_t n_max, const LatticeParams& params);

struct InterferenceSummaryRow {
  std::int64_t n = 0;
  double mean_outside = 0.0;
  double se_outside = 0.0;
  double mean_zeta = 0.0;
  double mean_a_inside = 0.0;
  double mean_signed = 0.0;
  double outside_bound = 0.0;  // e^4 2 d n exp(-K^2/2)
};

struct InterferenceSummary {
  std::vector<InterferenceSummaryRow> rows;
  std::int64_t trials = 0;
  std::int64_t tau_bound_failures = 0;
  std::int64_t partition_failures = 0;
};

/// Runs trials from {origin} at lambda = 1 + theta/R^(d-1) up to n_max and
/// averages the per-trial reports.
InterferenceSummary interference_study(const LatticeParams& params, double theta, double K,
                                       std::int64_t n_max, std::int64_t trials,
                                       std::uint64_t seed, unsigned workers = 0);

/// Seed used for the row of a sweep (and by a single estimate) at (d, R).
std::uint64_t row_seed(std::uint64_t master_seed, int d, int R);

/// Default stop rule with any nonzero field of the override applied.
StopRule stop_for(const LatticeParams& params, const std::optional<StopRule>& stop_override);

/// One estimate per R, each with its own row seed. Rows already present in
/// `completed` (matched by R) are reused instead of recomputed; on_row is
/// called after each newly computed row.
template <typename OnRow>
std::vector<CriticalEstimate> sweep(int d, std::span<const int> R_list,
                                    const BisectionConfig& config,
                                    const std::optional<StopRule>& stop_override,
                                    std::uint64_t master_seed,
                                    std::span<const CriticalEstimate> completed, OnRow&& on_row) {
  if (R_list.empty()) throw EstimatorError("sweep: R list is empty");
  std::vector<CriticalEstimate> out;
  for (int R : R_list) {
    const CriticalEstimate* done = nullptr;
    for (const auto& c : completed) {
      if (c.d == d && c.R == R) done = &c;
    }
    if (done != nullptr) {
      out.push_back(*done);
      continue;
    }
    const LatticeParams params(d, R);
    out.push_back(estimate_lambda_c(params, config, stop_for(params, stop_override),
                                    row_seed(master_seed, d, R)));
    on_row(out.back());
  }
  return out;
}

}  // namespace rangeperc
