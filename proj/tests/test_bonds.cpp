// SPDX-License-Identifier: Apache-2.0
//
// Bond oracle and random streams. Statistical checks use fixed seeds, so
// they are deterministic; thresholds sit at the 0.1% level.

#include <doctest.h>

#include <cmath>
#include <map>

#include "rangeperc/bonds.hpp"
#include "rangeperc/rng.hpp"

using namespace rangeperc;

namespace {

double ks_statistic(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - u[i], u[i] - static_cast<double>(i) / n));
  }
  return d;
}

double binomial_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                  k * std::log(p) + (n - k) * std::log1p(-p));
}

// Chi-square of `draws` Binomial(n, p) samples against the exact pmf, with
// tail cells merged until every expected count is at least 5. Returns
// (statistic, degrees of freedom).
std::pair<double, int> binomial_chi_square(int n, double p, int draws, std::uint64_t seed) {
  StreamRng rng(seed, 0, StreamTag::kBranching);
  std::vector<double> observed(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto k = sample_binomial(rng, n, p);
    REQUIRE(k >= 0);
    REQUIRE(k <= n);
    observed[static_cast<std::size_t>(k)] += 1;
  }
  double chi = 0.0;
  int cells = 0;
  double obs = 0.0, expd = 0.0;
  for (int k = 0; k <= n; ++k) {
    obs += observed[static_cast<std::size_t>(k)];
    expd += draws * binomial_pmf(n, k, p);
    if (expd >= 5.0 && k < n) {
      chi += (obs - expd) * (obs - expd) / expd;
      ++cells;
      obs = expd = 0.0;
    }
  }
  if (expd > 0.0) {
    chi += (obs - expd) * (obs - expd) / expd;
    ++cells;
  }
  return {chi, cells - 1};
}

// Upper 0.1% point of chi-square with k degrees of freedom (Wilson-Hilferty).
double chi_square_critical(int k) {
  const double z = 3.090232306167813;
  const double a = 2.0 / (9.0 * k);
  return k * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

}  // namespace

TEST_CASE("uniform01 over edges passes Kolmogorov-Smirnov") {
  const LatticeParams params(2, 3);
  const BondOracle oracle(0x1234, 7, 0.5);
  std::vector<double> u;
  for (int a = -20; a <= 20; ++a) {
    for (int b = -20; b <= 20; ++b) {
      const Site x{{a, b, 0}};
      for (const auto& delta : params.displacements()) {
        const Site y = translate(x, delta);
        if (x < y) u.push_back(oracle.uniform01(canonical_edge(x, y)));
      }
    }
  }
  REQUIRE(u.size() > 20000);
  const double crit = 1.949 / std::sqrt(static_cast<double>(u.size()));
  CHECK(ks_statistic(u) < crit);
}

TEST_CASE("bond is symmetric and monotone in p") {
  const LatticeParams params(2, 2);
  const BondOracle lo(99, 3, 0.2);
  const BondOracle hi = lo.with_p(0.7);
  int opened_lo = 0, opened_hi = 0;
  for (int a = -5; a <= 5; ++a) {
    const Site x{{a, 1, 0}};
    for (const auto& y : neighbors(x, params)) {
      CHECK(lo.bond(x, y) == lo.bond(y, x));
      if (lo.bond(x, y)) CHECK(hi.bond(x, y));
      opened_lo += lo.bond(x, y);
      opened_hi += hi.bond(x, y);
    }
  }
  CHECK(opened_lo < opened_hi);
  CHECK_THROWS(BondOracle(1, 1, 1.5));
  CHECK_THROWS(BondOracle(1, 1, -0.1));
}

TEST_CASE("for_each_open agrees with bond for every displacement") {
  for (int d = 1; d <= 3; ++d) {
    const LatticeParams params(d, 2);
    const BondOracle oracle(5, 11, 0.4);
    const Site x{{3, d > 1 ? -2 : 0, d > 2 ? 1 : 0}};
    std::vector<Site> via_scan;
    oracle.for_each_open(x, params.displacements(), [&](const Site& y) { via_scan.push_back(y); });
    std::vector<Site> via_bond;
    for (const auto& y : neighbors(x, params)) {
      if (oracle.bond(x, y)) via_bond.push_back(y);
    }
    CHECK(via_scan == via_bond);
  }
}

TEST_CASE("trials and seeds give distinct bond fields") {
  const EdgeKey e{Site{{0, 0, 0}}, Offset{{1, 0, 0}}};
  CHECK(BondOracle(1, 0, 0.5).uniform01(e) != BondOracle(1, 1, 0.5).uniform01(e));
  CHECK(BondOracle(1, 0, 0.5).uniform01(e) != BondOracle(2, 0, 0.5).uniform01(e));
  CHECK(BondOracle(1, 0, 0.5).uniform01(e) == BondOracle(1, 0, 0.9).uniform01(e));
}

TEST_CASE("streams replay exactly and differ by tag") {
  StreamRng a(42, 3, StreamTag::kWalk), b(42, 3, StreamTag::kWalk), c(42, 3, StreamTag::kReplay);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  CHECK(a.counter() == 100);
}

TEST_CASE("below is uniform") {
  StreamRng rng(8, 0, 77);
  std::vector<int> counts(7, 0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  double chi = 0.0;
  for (int c : counts) chi += (c - draws / 7.0) * (c - draws / 7.0) / (draws / 7.0);
  CHECK(chi < chi_square_critical(6));
}

TEST_CASE("binomial sampler matches the exact pmf in both regimes") {
  // The inversion branch, then the geometric waiting-time branch (mean > 30).
  for (auto [n, p] : {std::pair{24, 1.0 / 24}, std::pair{80, 0.0140625}, std::pair{10, 0.9},
                      std::pair{124, 0.5}, std::pair{1000, 0.07}}) {
    const auto [chi, dof] = binomial_chi_square(n, p, 50000, static_cast<std::uint64_t>(n));
    CAPTURE(n);
    CAPTURE(p);
    CHECK(chi < chi_square_critical(dof));
  }
  StreamRng rng(1, 1, 1);
  CHECK(sample_binomial(rng, 10, 0.0) == 0);
  CHECK(sample_binomial(rng, 10, 1.0) == 10);
  CHECK(sample_binomial(rng, 0, 0.5) == 0);
}

TEST_CASE("sample_distinct draws distinct, uniform indices") {
  StreamRng rng(3, 0, 9);
  std::vector<std::int64_t> out;
  std::map<std::int64_t, int> first;
  for (int i = 0; i < 40000; ++i) {
    sample_distinct(rng, 8, 3, out);
    REQUIRE(out.size() == 3);
    CHECK(out[0] != out[1]);
    CHECK(out[0] != out[2]);
    CHECK(out[1] != out[2]);
    ++first[out[0]];
  }
  double chi = 0.0;
  for (const auto& [k, c] : first) chi += (c - 5000.0) * (c - 5000.0) / 5000.0;
  CHECK(first.size() == 8);
  CHECK(chi < chi_square_critical(7));
  // The Fisher-Yates branch.
  sample_distinct(rng, 10, 9, out);
  std::sort(out.begin(), out.end());
  CHECK(std::adjacent_find(out.begin(), out.end()) == out.end());
  CHECK(out.back() < 10);
}
