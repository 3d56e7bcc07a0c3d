// SPDX-License-Identifier: Apache-2.0
//
// Branching random walk envelope: each particle has Binomial(V, p) children
// placed at distinct uniformly chosen neighbour displacements. The coupled
// mode runs the SIR epidemic inside the BRW so that eta_n(x) <= Z_n(x).

#pragma once

#include <absl/container/flat_hash_set.h>

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rangeperc/bonds.hpp"
#include "rangeperc/epidemic.hpp"
#include "rangeperc/lattice.hpp"
#include "rangeperc/rng.hpp"

namespace rangeperc {

/// Occupation counts Z_n(x), kept sorted by site.
class BrwPopulation {
 public:
  BrwPopulation() = default;
  static BrwPopulation unit_mass(const Site& x);
  /// Builds a population from unsorted (site, count) pairs; merges duplicates.
  static BrwPopulation from_counts(std::vector<std::pair<Site, std::int64_t>> counts,
                                   std::int64_t generation);

  std::span<const std::pair<Site, std::int64_t>> counts() const { return counts_; }
  std::int64_t at(const Site& x) const;
  std::int64_t total() const { return total_; }
  std::int64_t generation() const { return n_; }
  bool empty() const { return total_ == 0; }

 private:
  std::vector<std::pair<Site, std::int64_t>> counts_;
  std::int64_t total_ = 0;
  std::int64_t n_ = 0;
};

/// Union of the supports of Z_1..Z_n and its largest sup-norm.
class RangeTracker {
 public:
  void absorb(const BrwPopulation& pop);
  void absorb(std::span<const Site> sites);

  bool contains(const Site& x) const { return visited_.contains(x); }
  std::size_t size() const { return visited_.size(); }
  std::int64_t max_linf() const { return max_linf_; }

 private:
  absl::flat_hash_set<Site> visited_;
  std::int64_t max_linf_ = 0;
};

/// Appends the children of one particle at x to `out`.
void branch_particle(const Site& x, StreamRng& rng, const LatticeParams& params, double p,
                     std::vector<std::int64_t>& scratch, std::vector<Site>& out);

BrwPopulation brw_step(const BrwPopulation& pop, StreamRng& rng, const LatticeParams& params,
                       double p);

struct CoupledState {
  EpidemicState epidemic;
  BrwPopulation brw;

  static CoupledState initial();
  std::int64_t generation() const { return brw.generation(); }
};

/// One synchronized generation. For x in eta_n the first particle at x is
/// the representative: its child toward a susceptible y exists iff the
/// oracle bond (x, y) is open, and toward any other neighbour iff a fresh
/// draw from rng is below p. The epidemic advances on exactly those bonds,
/// so it is the bond-exact epidemic of the oracle. All other particles
/// branch independently from rng.
void coupled_step(CoupledState& cs, const BondOracle& oracle, StreamRng& rng,
                  const LatticeParams& params);

/// Sites with eta_n(x) > Z_n(x); zero whenever the coupling holds.
std::int64_t coupling_violations(const CoupledState& cs);

/// One step of the walk with uniform steps on the V neighbour displacements.
Site rw_step(const Site& x, StreamRng& rng, const LatticeParams& params);

// ---------------------------------------------------------------------------
// Empirical checks

struct BoxExitRow {
  std::int64_t k = 0;
  std::int64_t trials = 0;
  std::int64_t hits = 0;          // ||X_k/R||_inf >= K sqrt(n)
  double p_hat = 0.0;
  std::int64_t hits_by_k = 0;     // same event for some j <= k
  double p_hat_by_k = 0.0;
  double bound = 0.0;             // 2 d exp(-K^2/2)
  bool vacuous = false;           // bound >= 1
  double mean_axis0 = 0.0;        // mean of X_k^1 / R
  double se_axis0 = 0.0;
};

/// Walks of n unit-normalised steps; per k <= n the frequency of leaving the
/// box of half-width K sqrt(n), with the Azuma-Hoeffding bound attached.
std::vector<BoxExitRow> rw_box_exit_prob(const LatticeParams& params, std::int64_t n, double K,
                                         std::int64_t trials, std::uint64_t seed,
                                         unsigned workers);

struct RangeTailRow {
  double r = 0.0;            // unit-scaled half-width
  std::int64_t trials = 0;
  std::int64_t hits = 0;
  double p_hat = 0.0;
  double scaled = 0.0;       // (r+1)^2 p_hat
};

struct RangeTailReport {
  std::vector<RangeTailRow> rows;
  bool nested = true;                 // per-trial exit indicators nonincreasing in r
  std::int64_t truncated_trials = 0;  // population cap hit before n
};

struct RangeTailRegime {
  double c = 8.0;  // n <= c R^(d-1)
  double K = 1.0;  // r <= K sqrt(n)
};

/// Frequency with which the BRW range up to generation n leaves [-r, r]^d
/// (unit scale), for each r in the grid. Throws if (n, r) is outside the
/// declared regime or theta <= 0.
RangeTailReport range_tail(const LatticeParams& params, double theta, std::int64_t n,
                           std::span<const double> r_grid, std::int64_t trials,
                           std::uint64_t seed, unsigned workers,
                           const RangeTailRegime& regime = {},
                           std::int64_t population_cap = 5'000'000);

}  // namespace rangeperc
