// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "rangeperc/estimators.hpp"
#include "rangeperc/tables.hpp"

using namespace rangeperc;

TEST_CASE("survival flags are monotone in lambda under the shared oracle") {
  const LatticeParams params(2, 2);
  const StopRule stop = StopRule::defaults(params);
  SurvivalOptions opts;
  opts.workers = 1;
  const auto lo = survival_flags(params, 1.0, stop, 0, 400, 5, opts);
  const auto hi = survival_flags(params, 1.0 + 4.0 / 2, stop, 0, 400, 5, opts);
  int n_lo = 0, n_hi = 0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    CHECK(lo[i] <= hi[i]);
    n_lo += lo[i];
    n_hi += hi[i];
  }
  CHECK(n_lo < n_hi);
}

TEST_CASE("estimate_survival separates sub- and supercritical lambda") {
  const LatticeParams params(2, 2);
  const StopRule stop = StopRule::defaults(params);
  const auto sub = estimate_survival(params, 0.7, stop, 2000, 1);
  const auto super = estimate_survival(params, 2.0, stop, 2000, 1);
  CHECK(sub.ci_hi < super.ci_lo);
  CHECK(sub.q_hat == doctest::Approx(double(sub.survivals) / 2000));
  CHECK_THROWS_AS(estimate_survival(params, 0.0, stop, 10, 1), EstimatorError);
  CHECK_THROWS_AS(estimate_survival(params, 25.0, stop, 10, 1), EstimatorError);
  CHECK_THROWS_AS(estimate_survival(params, 1.0, stop, 0, 1), EstimatorError);
}

TEST_CASE("results do not depend on the worker count") {
  const LatticeParams params(2, 2);
  const StopRule stop = StopRule::defaults(params);
  SurvivalOptions one, many;
  one.workers = 1;
  many.workers = 5;
  CHECK(survival_flags(params, 1.3, stop, 10, 300, 3, one) ==
        survival_flags(params, 1.3, stop, 10, 300, 3, many));
  const auto a = mean_eta_curve(params, 0.5, 6, 3000, 4, 1);
  const auto b = mean_eta_curve(params, 0.5, 6, 3000, 4, 3);
  CHECK(mean_eta_table(a).str() == mean_eta_table(b).str());
}

TEST_CASE("d=1 has no supercritical point below p = 1") {
  // In one dimension p_c = 1. A cluster reaching mass m must cross about
  // m/2 cuts of 3 edges each, so the estimate lands where (1-p)^3 m/2 ~ 1,
  // here p ~ 0.93, far above any two-dimensional value.
  const LatticeParams params(1, 2);
  BisectionConfig config;
  config.theta_max = 1e6;
  config.trials_per_point = 200;
  config.max_trials_per_point = 800;
  config.workers = 1;
  StopRule stop;
  stop.gen_cap = 1'000'000;
  stop.mass_cap = 5'000;
  const auto est = estimate_lambda_c(params, config, stop, 11);
  CHECK(est.lambda_hi <= 4.0);
  CHECK(est.lambda_c_hat > 3.4);
}

TEST_CASE("bisection brackets lambda_c with the scaled floor") {
  const LatticeParams params(2, 2);
  BisectionConfig config;
  config.workers = 1;
  config.theta_tol = 0.2;
  const auto est = estimate_lambda_c(params, config, StopRule::defaults(params), 9);
  CHECK(est.q_floor == doctest::Approx(0.5));
  CHECK(est.lambda_lo < est.lambda_hi);
  CHECK(est.lambda_lo <= est.lambda_c_hat);
  CHECK(est.lambda_c_hat <= est.lambda_hi);
  CHECK(est.bracket_width <= 0.2 + 1e-12);
  CHECK(est.theta_hat == doctest::Approx(2 * (est.lambda_c_hat - 1)));
  CHECK(est.theta_positive());
  CHECK(est.trials_total <= config.trial_budget);
  CHECK_FALSE(est.path.empty());
  CHECK(BisectionConfig{}.floor_for(LatticeParams(2, 8)) == doctest::Approx(1.0 / 8));
  CHECK(BisectionConfig{}.floor_for(LatticeParams(1, 8)) == doctest::Approx(0.5));
}

TEST_CASE("bisection refuses caps that make lambda = 1 look supercritical") {
  const LatticeParams params(2, 4);
  BisectionConfig config;
  config.workers = 1;
  config.q_floor = 0.05;
  StopRule stop;
  stop.gen_cap = 2;
  stop.mass_cap = 50'000;
  CHECK_THROWS_AS(estimate_lambda_c(params, config, stop, 1), EstimatorError);
}

TEST_CASE("mean |eta_k| curve") {
  const LatticeParams params(2, 4);
  const auto curve = mean_eta_curve(params, 0.05, std::nullopt, 20000, 2, 1);
  CHECK(curve.k_max == 5);
  REQUIRE(curve.means.size() == 6);
  CHECK(curve.means[0].mean == 1.0);
  CHECK(curve.means[0].se == 0.0);
  // Branching comparison: the mean never exceeds lambda^k.
  const double lambda = 1 + 0.05 / 4;
  for (const auto& m : curve.means) CHECK(m.mean <= std::pow(lambda, m.k) + 4 * m.se);
  CHECK_THROWS_AS(mean_eta_curve(params, 0.0, 3, 10, 1), EstimatorError);
  CHECK_THROWS_AS(mean_eta_curve(params, 1.5, 3, 10, 1), EstimatorError);
}

TEST_CASE("interference report partitions and bounds") {
  const LatticeParams params(2, 4);
  const auto summary = interference_study(params, 0.5, 3.0, 4, 2000, 6, 1);
  CHECK(summary.tau_bound_failures == 0);
  CHECK(summary.partition_failures == 0);
  REQUIRE(summary.rows.size() == 5);
  const auto& last = summary.rows.back();
  CHECK(last.n == 4);
  CHECK(last.outside_bound == doctest::Approx(std::exp(4.0) * 2 * 2 * 4 * std::exp(-4.5)));
  CHECK(last.mean_outside <= last.outside_bound);
  // At n = 0 the box has half-width 0 and holds only the origin.
  CHECK(summary.rows[0].mean_outside == 0.0);

  const InfectionRecord records[] = {{Site::origin(), 0}, {Site{{1, 0, 0}}, 1}, {Site{{9, 0, 0}}, 2}};
  const auto rep = interference_report(records, 0.5, 1.0, 2, params);
  CHECK(rep.tau_bound_holds());
  CHECK(rep.partition_holds());
  CHECK(rep.rows[2].rho == 3);
  CHECK(rep.rows[1].rho == 2);
  CHECK_THROWS_AS(interference_report({}, 0.5, 1.0, 2, params), EstimatorError);
}

TEST_CASE("row seeds and stop overrides") {
  CHECK(row_seed(1, 2, 4) != row_seed(1, 2, 8));
  CHECK(row_seed(1, 2, 4) != row_seed(1, 3, 4));
  CHECK(row_seed(1, 2, 4) == row_seed(1, 2, 4));
  const LatticeParams params(3, 4);
  const auto def = stop_for(params, std::nullopt);
  CHECK(def.gen_cap == 160);
  CHECK(def.mass_cap == 50'000);
  StopRule o;
  o.mass_cap = 10;
  const auto mixed = stop_for(params, o);
  CHECK(mixed.gen_cap == 160);
  CHECK(mixed.mass_cap == 10);
}

TEST_CASE("sweep reuses completed rows") {
  BisectionConfig config;
  config.workers = 1;
  config.theta_tol = 0.5;
  const int ranges[] = {1, 2};
  int computed = 0;
  const auto full = sweep(2, ranges, config, std::nullopt, 3, {}, [&](const auto&) { ++computed; });
  CHECK(computed == 2);
  const CriticalEstimate first[] = {full[0]};
  computed = 0;
  const auto resumed = sweep(2, ranges, config, std::nullopt, 3, first, [&](const auto&) { ++computed; });
  CHECK(computed == 1);
  CHECK(sweep_table(resumed).str() == sweep_table(full).str());
}
