// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "rangeperc/epidemic.hpp"
#include "rangeperc/verify.hpp"

using namespace rangeperc;

namespace {
Site site(int a, int b = 0, int c = 0) { return Site{{a, b, c}}; }

double four_sigma(double p, double n) { return 4.0 * std::sqrt(p * (1 - p) / n); }
}  // namespace

TEST_CASE("initial state and disjointness") {
  const Site eta[] = {site(0), site(1)};
  const Site rho[] = {site(2)};
  const auto s = EpidemicState::initial(eta, rho);
  CHECK(s.cumulative() == 2);
  CHECK(s.generation() == 0);
  CHECK(s.is_infected(site(1)));
  CHECK(s.is_recovered(site(2)));
  CHECK(s.is_susceptible(site(3)));
  CHECK(s.infection_time(site(0)) == 0);
  CHECK(s.infection_time(site(2)) == kNeverInfected);
  const Site clash[] = {site(1)};
  CHECK_THROWS_AS(EpidemicState::initial(eta, clash), std::invalid_argument);
}

TEST_CASE("frontier of two adjacent sites at R=1, d=2 has 14 edges") {
  const LatticeParams params(2, 1);
  const Site eta[] = {site(0, 0), site(1, 0)};
  const auto s = EpidemicState::initial(eta);
  const auto f = frontier(s, params);
  CHECK(f.size() == 14);
  for (const auto& e : f) CHECK(s.is_susceptible(e.to));
}

TEST_CASE("p = 0 and p = 1 limits") {
  const LatticeParams params(2, 1);
  const Site origin = Site::origin();
  StopRule stop;
  stop.gen_cap = 3;
  auto none = run_trial(std::span(&origin, 1), {}, BondOracle(1, 0, 0.0), params, stop);
  CHECK(none.outcome == Outcome::kExtinct);
  CHECK(none.cumulative.back() == 1);
  CHECK(none.extinction_time() == 1);
  auto all = run_trial(std::span(&origin, 1), {}, BondOracle(1, 0, 1.0), params, stop);
  CHECK(all.outcome == Outcome::kGenCap);
  // With every bond open, eta_n is the sup-norm sphere of radius n.
  CHECK(all.eta_sizes == std::vector<std::int64_t>{1, 8, 16, 24});
  CHECK(all.max_linf.back() == 3);
}

TEST_CASE("rho blocks infection") {
  const LatticeParams params(1, 1);
  const Site eta[] = {site(0)};
  const Site rho[] = {site(-1), site(1)};
  auto s = EpidemicState::initial(eta, rho);
  advance(s, BondOracle(1, 0, 1.0), params);
  CHECK(s.extinct());
  CHECK(s.cumulative() == 1);
}

TEST_CASE("d=1, R=1, p=0.3: P(L = 1) = (1-p)^2") {
  const LatticeParams params(1, 1);
  const Site origin = Site::origin();
  const double p = 0.3;
  const int trials = 20000;
  int lone = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = run_trial(std::span(&origin, 1), {}, BondOracle(77, t, p), params, StopRule{});
    lone += r.cumulative.back() == 1;
  }
  const double target = (1 - p) * (1 - p);
  CHECK(std::abs(lone / double(trials) - target) < four_sigma(target, trials));
}

TEST_CASE("a site with two infected neighbours is infected w.p. 1-(1-p)^2") {
  const LatticeParams params(1, 1);
  const Site eta[] = {site(-1), site(1)};
  const double p = 0.35;
  const int trials = 20000;
  const double target = 1 - (1 - p) * (1 - p);
  for (auto mode : {StepMode::kBondExact, StepMode::kAggregateFast}) {
    int hit = 0;
    for (int t = 0; t < trials; ++t) {
      auto s = EpidemicState::initial(eta);
      if (mode == StepMode::kBondExact) {
        advance(s, BondOracle(5, t, p), params);
      } else {
        StreamRng rng(5, t, StreamTag::kAggregate);
        advance_aggregate(s, p, rng, params);
      }
      hit += s.is_infected(site(0));
    }
    CAPTURE(to_string(mode));
    CHECK(std::abs(hit / double(trials) - target) < four_sigma(target, trials));
  }
}

TEST_CASE("epidemic shells equal percolation cluster shells") {
  for (int d = 1; d <= 2; ++d) {
    for (int R = 1; R <= 2; ++R) {
      const LatticeParams params(d, R);
      const Site origin = Site::origin();
      StopRule stop;
      stop.mass_cap = 1000;
      TrialOptions opts;
      opts.keep_shells = true;
      for (int t = 0; t < 100; ++t) {
        const BondOracle oracle(21, t, 0.3);
        const auto r = run_trial(std::span(&origin, 1), {}, oracle, params, stop, opts);
        const auto cluster = percolation_cluster(origin, oracle, params, r.cumulative.back() + 1);
        CHECK(compare_shells(r, cluster) >= 0);
      }
    }
  }
}

TEST_CASE("cluster at p = 1 with cap V+1") {
  const LatticeParams params(2, 2);
  const auto c = percolation_cluster(Site::origin(), BondOracle(1, 0, 1.0), params, 25);
  CHECK(c.labels.size() == 25);
  CHECK(c.max_label() == 1);
  CHECK(c.shell(1).size() == 24);
  const auto lone = percolation_cluster(Site::origin(), BondOracle(1, 0, 0.0), params, 10);
  CHECK(lone.labels.size() == 1);
  CHECK_FALSE(lone.truncated);
  CHECK_THROWS(percolation_cluster(Site::origin(), BondOracle(1, 0, 0.5), params, 0));
}

TEST_CASE("increment formula on hand-worked states") {
  const LatticeParams params(2, 2);
  const double theta = 0.5;
  const double eps = theta / 2.0;
  const Site one[] = {site(0, 0)};
  CHECK(expected_increment(EpidemicState::initial(one), theta, params) == doctest::Approx(eps));
  const Site two[] = {site(0, 0), site(1, 0)};
  CHECK(expected_increment(EpidemicState::initial(two), theta, params) ==
        doctest::Approx(2 * eps - (1 + eps) * 2.0 / 24.0));
  CHECK(occupied_neighbors(EpidemicState::initial(two), site(0, 0), params) == 1);
}

TEST_CASE("formula equals p |frontier| - |eta|") {
  const LatticeParams params(2, 2);
  const Site eta[] = {site(0, 0), site(1, 0), site(3, 1)};
  const Site rho[] = {site(0, 1)};
  const auto s = EpidemicState::initial(eta, rho);
  const double theta = 1.0;
  const double p = infection_probability(theta, params);
  const double edges = static_cast<double>(frontier(s, params).size());
  CHECK(p * edges - 3.0 == doctest::Approx(expected_increment(s, theta, params)));
}

TEST_CASE("aggregate and bond-exact survival agree in law") {
  const LatticeParams params(2, 2);
  const Site origin = Site::origin();
  const double p = infection_probability(1.0, params);
  StopRule stop;
  stop.gen_cap = 8;
  const int trials = 8000;
  int exact = 0, fast = 0;
  TrialOptions agg;
  agg.mode = StepMode::kAggregateFast;
  for (int t = 0; t < trials; ++t) {
    exact += run_trial(std::span(&origin, 1), {}, BondOracle(3, t, p), params, stop).survived();
    fast += run_trial(std::span(&origin, 1), {}, BondOracle(4, t, p), params, stop, agg).survived();
  }
  const double a = exact / double(trials), b = fast / double(trials);
  CHECK(std::abs(a - b) < 4 * std::sqrt(a * (1 - a) * 2 / trials));
}

TEST_CASE("box stop fires when the epidemic leaves the box") {
  const LatticeParams params(1, 1);
  const Site origin = Site::origin();
  StopRule stop;
  stop.box = Box(2.0);
  const auto r = run_trial(std::span(&origin, 1), {}, BondOracle(1, 0, 1.0), params, stop);
  CHECK(r.outcome == Outcome::kBoxExit);
  CHECK(r.final_generation == 3);
}

TEST_CASE("monotone coupling and union bound hold on simple instances") {
  const LatticeParams params(2, 1);
  const Site eta[] = {site(0, 0)};
  const auto nb = neighbors(site(0, 0), params);
  for (int t = 0; t < 50; ++t) {
    const BondOracle oracle(9, t, 0.5);
    CHECK(monotone_coupling_check(eta, {}, oracle, params, 10));
    CHECK(monotone_coupling_check(eta, nb, oracle, params, 10));
    const Site pair[] = {site(0, 0), site(4, 1)};
    CHECK(union_bound_check(pair, oracle, params, 10));
  }
}

TEST_CASE("step mode names round-trip") {
  CHECK(parse_step_mode("bond-exact") == StepMode::kBondExact);
  CHECK(parse_step_mode(to_string(StepMode::kAggregateFast)) == StepMode::kAggregateFast);
  CHECK_THROWS(parse_step_mode("fast"));
}

TEST_CASE("increment suite tables are identical at any worker count") {
  IncrementParams params;
  params.ranges = {2};
  params.thetas = {1.0};
  params.states = 6;
  params.replays = 500;
  const auto a = verify_increment(params, 3, 1);
  const auto b = verify_increment(params, 3, 4);
  CHECK(a.table.str() == b.table.str());
}
