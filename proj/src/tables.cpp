// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/tables.hpp"

namespace rangeperc {

CsvTable survival_table(std::span<const SurvivalStats> points) {
  CsvTable t({"lambda", "trials", "survivals", "q_hat", "ci_lo", "ci_hi"});
  for (const auto& s : points) t.add(s.lambda, s.trials, s.survivals, s.q_hat, s.ci_lo, s.ci_hi);
  return t;
}

CsvTable bisection_table(const CriticalEstimate& est) {
  CsvTable t({"lambda", "trials", "survivals", "q_hat", "ci_lo", "ci_hi", "class", "ambiguous"});
  for (const auto& p : est.path) {
    const auto& s = p.stats;
    t.add(s.lambda, s.trials, s.survivals, s.q_hat, s.ci_lo, s.ci_hi,
          p.cls == PointClass::kSupercritical ? "super" : "sub", p.ambiguous);
  }
  return t;
}

CsvTable sweep_table(std::span<const CriticalEstimate> rows) {
  CsvTable t({"d", "R", "lambda_lo", "lambda_hi", "lambda_c_hat", "theta_hat", "bracket_width",
              "trials_total", "seed"});
  for (const auto& e : rows) {
    t.add(e.d, e.R, e.lambda_lo, e.lambda_hi, e.lambda_c_hat, e.theta_hat, e.bracket_width,
          e.trials_total, format_seed(e.seed));
  }
  return t;
}

CsvTable mean_eta_table(const MeanEtaCurve& curve) {
  CsvTable t({"k", "mean", "se"});
  for (const auto& m : curve.means) t.add(m.k, m.mean, m.se);
  return t;
}

CsvTable gw_table(std::span<const SurvivalBoundRow> rows) {
  CsvTable t({"k", "N", "q", "mean", "survival", "k_times_p", "bound", "limit", "ok"});
  for (const auto& r : rows) {
    t.add(r.k, r.N, r.q, r.mean, static_cast<double>(r.survival), r.k_times_p, r.bound, r.limit,
          r.ok);
  }
  return t;
}

CsvTable box_exit_table(std::span<const BoxExitRow> rows) {
  CsvTable t({"r_or_k", "trials", "hits", "p_hat", "bound", "hits_by_k", "p_hat_by_k", "mean_axis0",
              "se_axis0"});
  for (const auto& r : rows) {
    t.add(r.k, r.trials, r.hits, r.p_hat, r.bound, r.hits_by_k, r.p_hat_by_k, r.mean_axis0,
          r.se_axis0);
  }
  return t;
}

CsvTable range_tail_table(const RangeTailReport& report) {
  CsvTable t({"r_or_k", "trials", "hits", "p_hat", "bound"});
  for (const auto& r : report.rows) t.add(r.r, r.trials, r.hits, r.p_hat, r.scaled);
  return t;
}

CsvTable interference_table(const InterferenceSummary& summary) {
  CsvTable t({"n", "mean_outside", "se_outside", "mean_zeta", "mean_a_inside", "mean_signed",
              "outside_bound"});
  for (const auto& r : summary.rows) {
    t.add(r.n, r.mean_outside, r.se_outside, r.mean_zeta, r.mean_a_inside, r.mean_signed,
          r.outside_bound);
  }
  return t;
}

}  // namespace rangeperc
