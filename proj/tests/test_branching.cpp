// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>

#include "rangeperc/branching.hpp"
#include "rangeperc/verify.hpp"

using namespace rangeperc;

TEST_CASE("population bookkeeping") {
  const Site a{{1, 0, 0}}, b{{-1, 2, 0}};
  const auto pop = BrwPopulation::from_counts({{a, 2}, {b, 1}, {a, 3}}, 4);
  CHECK(pop.total() == 6);
  CHECK(pop.at(a) == 5);
  CHECK(pop.at(Site::origin()) == 0);
  CHECK(pop.generation() == 4);
  CHECK(pop.counts().size() == 2);
  CHECK(BrwPopulation::unit_mass(a).total() == 1);
}

TEST_CASE("siblings never share a site and mean offspring is V p") {
  const LatticeParams params(2, 2);
  const double p = 0.3;
  StreamRng rng(6, 0, StreamTag::kBranching);
  std::vector<std::int64_t> scratch;
  std::vector<Site> kids;
  double total = 0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    kids.clear();
    branch_particle(Site::origin(), rng, params, p, scratch, kids);
    auto sorted = kids;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (const auto& k : kids) CHECK(adjacent(Site::origin(), k, params));
    total += static_cast<double>(kids.size());
  }
  const double mean = 24 * p;
  const double se = std::sqrt(24 * p * (1 - p) / draws);
  CHECK(std::abs(total / draws - mean) < 4 * se);
}

TEST_CASE("coupled runs never violate domination") {
  const LatticeParams params(2, 2);
  const double p = infection_probability(1.0, params);
  for (int t = 0; t < 200; ++t) {
    const BondOracle oracle(13, t, p);
    StreamRng rng(13, t, StreamTag::kCoupledFill);
    auto cs = CoupledState::initial();
    for (int n = 0; n < 20 && !cs.brw.empty(); ++n) {
      coupled_step(cs, oracle, rng, params);
      REQUIRE(coupling_violations(cs) == 0);
      CHECK(static_cast<std::int64_t>(cs.epidemic.infected().size()) <= cs.brw.total());
    }
  }
}

TEST_CASE("coupled epidemic is the bond-exact epidemic of the oracle") {
  const LatticeParams params(2, 1);
  const double p = 0.2;
  for (int t = 0; t < 100; ++t) {
    const BondOracle oracle(31, t, p);
    StreamRng rng(31, t, StreamTag::kCoupledFill);
    auto cs = CoupledState::initial();
    const Site origin = Site::origin();
    auto plain = EpidemicState::initial(std::span(&origin, 1));
    for (int n = 0; n < 15; ++n) {
      coupled_step(cs, oracle, rng, params);
      advance(plain, oracle, params);
      auto a = cs.epidemic.infected(), b = plain.infected();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      REQUIRE(a == b);
    }
  }
}

TEST_CASE("walk steps follow the enumerated one-step law") {
  const LatticeParams params(2, 3);
  // Exact per-axis second moment from the displacement table.
  double m2 = 0.0;
  for (const auto& d : params.displacements()) m2 += double(d.c[0]) * d.c[0];
  m2 /= static_cast<double>(params.volume());
  StreamRng rng(2, 0, StreamTag::kWalk);
  const int draws = 200000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < draws; ++i) {
    const Site y = rw_step(Site::origin(), rng, params);
    REQUIRE(y != Site::origin());
    REQUIRE(linf_norm(y) <= 3);
    s1 += y.c[0];
    s2 += double(y.c[0]) * y.c[0];
  }
  const double sd = std::sqrt(m2);
  CHECK(std::abs(s1 / draws) < 4 * sd / std::sqrt(double(draws)));
  CHECK(s2 / draws == doctest::Approx(m2).epsilon(0.01));
}

TEST_CASE("half-space law matches brute-force enumeration") {
  const LatticeParams params(2, 1);
  const auto law = half_space_law(params, 3);
  // Enumerate all 8^3 step sequences.
  const auto deltas = params.displacements();
  int positive2 = 0, positive3 = 0;
  for (const auto& a : deltas) {
    for (const auto& b : deltas) {
      positive2 += a.c[0] + b.c[0] > 0;
      for (const auto& c : deltas) positive3 += a.c[0] + b.c[0] + c.c[0] > 0;
    }
  }
  CHECK(law[0] == 0.0);
  CHECK(law[1] == doctest::Approx(3.0 / 8.0));
  CHECK(law[2] == doctest::Approx(positive2 / 64.0));
  CHECK(law[3] == doctest::Approx(positive3 / 512.0));
}

TEST_CASE("box-exit report carries the Azuma bound") {
  const LatticeParams params(2, 4);
  const auto rows = rw_box_exit_prob(params, 25, 3.0, 20000, 1, 1);
  REQUIRE(rows.size() == 25);
  for (const auto& r : rows) {
    CHECK(r.bound == doctest::Approx(4 * std::exp(-4.5)));
    CHECK(r.p_hat <= r.bound);
    CHECK(r.hits <= r.hits_by_k);
  }
  const auto loose = rw_box_exit_prob(params, 4, 0.5, 1000, 1, 1);
  CHECK(loose.front().vacuous);
  CHECK_THROWS(rw_box_exit_prob(params, 0, 1.0, 10, 1, 1));
}

TEST_CASE("range tail: trivial cases, nesting and regime") {
  const LatticeParams params(2, 4);
  const double grid[] = {0.5, 1, 2, 4};
  const auto rep = range_tail(params, 1.0, 4, grid, 2000, 7, 1, RangeTailRegime{8, 2});
  CHECK(rep.nested);
  REQUIRE(rep.rows.size() == 4);
  // n steps of sup-norm at most 1 cannot leave [-r, r] for r >= n.
  CHECK(rep.rows[3].hits == 0);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].hits <= rep.rows[i - 1].hits);
  const double far[] = {100};
  CHECK_THROWS(range_tail(params, 1.0, 4, far, 10, 7, 1));
  CHECK_THROWS(range_tail(params, 1.0, 1000, grid, 10, 7, 1));
  CHECK_THROWS(range_tail(params, 0.0, 4, grid, 10, 7, 1));
}

TEST_CASE("range tracker") {
  RangeTracker t;
  const Site s[] = {Site{{3, -5, 0}}, Site{{1, 1, 0}}, Site{{3, -5, 0}}};
  t.absorb(s);
  CHECK(t.size() == 2);
  CHECK(t.max_linf() == 5);
  CHECK(t.contains(Site{{1, 1, 0}}));
}
