// SPDX-License-Identifier: Apache-2.0
//
// Discrete-time SIR epidemic on the range-R lattice, driven by the bond
// oracle, plus the breadth-first percolation cluster it is equivalent to.

#pragma once

#include <absl/container/flat_hash_map.h>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rangeperc/bonds.hpp"
#include "rangeperc/lattice.hpp"
#include "rangeperc/rng.hpp"

namespace rangeperc {

enum class StepMode { kBondExact, kAggregateFast };

std::string_view to_string(StepMode mode);
StepMode parse_step_mode(std::string_view text);

inline constexpr std::int64_t kNeverInfected = std::numeric_limits<std::int64_t>::max();

struct FrontierEdge {
  Site from;  // infected endpoint
  Site to;    // susceptible endpoint
  friend bool operator==(const FrontierEdge&, const FrontierEdge&) = default;
};

struct InfectionRecord {
  Site site;
  std::int64_t tau;  // generation of infection, kNeverInfected if never
};

/// (eta_n, rho_n, n, L_n). Susceptible sites are the complement of
/// eta_n and rho_n and are never materialized.
class EpidemicState {
 public:
  /// Throws std::invalid_argument if eta0 and rho0 intersect.
  static EpidemicState initial(std::span<const Site> eta0, std::span<const Site> rho0 = {});

  const std::vector<Site>& infected() const { return infected_; }
  std::int64_t generation() const { return n_; }
  /// L_n: total number of infections up to and including generation n.
  std::int64_t cumulative() const { return cumulative_; }
  bool extinct() const { return infected_.empty(); }

  bool is_infected(const Site& x) const;
  bool is_recovered(const Site& x) const;
  bool is_susceptible(const Site& x) const;
  std::size_t recovered_count() const;

  /// Generation of first infection; kNeverInfected for sites of rho_0 and
  /// sites not yet reached.
  std::int64_t infection_time(const Site& x) const;

  /// rho_n in sorted order.
  std::vector<Site> recovered() const;
  /// Every site ever infected, in order of infection.
  std::vector<InfectionRecord> infection_records() const;

  // Building blocks of one generation. During a generation, try_infect
  // claims a site of xi_n for eta_{n+1}; was_susceptible still reports the
  // state at time n. commit_generation then makes the claims current.
  bool was_susceptible(const Site& y) const;
  bool try_infect(const Site& y);
  void commit_generation();

 private:
  static constexpr std::int64_t kInitiallyRecovered = -1;

  std::vector<Site> infected_;
  std::vector<Site> pending_;
  std::vector<Site> history_;             // all infections, in order
  absl::flat_hash_map<Site, std::int64_t> tau_;  // eta ∪ rho ∪ pending -> tau
  std::int64_t n_ = 0;
  std::int64_t cumulative_ = 0;
  std::size_t initially_recovered_ = 0;
};

/// Pairs (x, y) with x in eta_n, y ~ x, y susceptible. Grouping by `to`
/// gives D_n(y).
std::vector<FrontierEdge> frontier(const EpidemicState& state, const LatticeParams& params);

/// Bond-exact generation: y joins eta_{n+1} iff some frontier edge (x, y)
/// is open under the oracle.
void advance(EpidemicState& state, const BondOracle& oracle, const LatticeParams& params);

/// Aggregate generation: each susceptible y with |D_n(y)| = k > 0 is infected
/// with probability 1 - (1-p)^k, drawn from rng in frontier-discovery order.
void advance_aggregate(EpidemicState& state, double p, StreamRng& rng,
                       const LatticeParams& params);

EpidemicState step(EpidemicState state, const BondOracle& oracle, const LatticeParams& params);

/// Finite-size survival surrogate. A trial survives if L_n exceeds
/// mass_cap, or it is still alive at generation gen_cap, or (when a box is
/// set) some infected site leaves the box, whichever happens first.
struct StopRule {
  std::int64_t gen_cap = 0;
  std::int64_t mass_cap = 0;
  std::optional<Box> box;

  static constexpr std::int64_t kDefaultMassCap = 50'000;
  /// mass_cap = 5e4, gen_cap = 10 R^(d-1).
  static StopRule defaults(const LatticeParams& params);
};

enum class Outcome { kExtinct, kMassCap, kGenCap, kBoxExit };
std::string_view to_string(Outcome outcome);

struct TrialOptions {
  StepMode mode = StepMode::kBondExact;
  bool keep_shells = false;  // record eta_n for every n
};

struct TrialResult {
  std::vector<std::int64_t> eta_sizes;   // |eta_n|, n = 0..final
  std::vector<std::int64_t> cumulative;  // L_n
  std::vector<std::int64_t> max_linf;    // max ||x||_inf over eta_0..eta_n
  Outcome outcome = Outcome::kExtinct;
  std::int64_t final_generation = 0;
  std::vector<std::vector<Site>> shells;  // only with keep_shells

  bool survived() const { return outcome != Outcome::kExtinct; }
  /// Generation at which eta became empty.
  std::optional<std::int64_t> extinction_time() const;
};

/// Runs generations until extinction or a stop condition. Aggregate mode
/// draws from the stream (master_seed, trial_index, kAggregate) of the oracle.
TrialResult run_trial(std::span<const Site> eta0, std::span<const Site> rho0,
                      const BondOracle& oracle, const LatticeParams& params,
                      const StopRule& stop, const TrialOptions& options = {});

/// Same as run_trial but also hands back the final state.
TrialResult run_trial(EpidemicState& state, const BondOracle& oracle,
                      const LatticeParams& params, const StopRule& stop,
                      const TrialOptions& options = {});

struct ClusterResult {
  std::vector<std::pair<Site, std::int64_t>> labels;  // site, graph distance; BFS order
  bool truncated = false;

  std::int64_t max_label() const { return labels.empty() ? -1 : labels.back().second; }
  /// Sorted sites at distance exactly n.
  std::vector<Site> shell(std::int64_t n) const;
};

/// Breadth-first search over open bonds from the origin set, avoiding the
/// blocked sites. Whole distance shells are added until at least `cap`
/// sites are labelled; truncated reports that the search stopped early.
ClusterResult percolation_cluster(std::span<const Site> origins, const BondOracle& oracle,
                                  const LatticeParams& params, std::int64_t cap,
                                  std::span<const Site> blocked = {});
ClusterResult percolation_cluster(const Site& origin, const BondOracle& oracle,
                                  const LatticeParams& params, std::int64_t cap);

/// E[|eta_{n+1}| - |eta_n| | state] when p = (1 + theta/R^(d-1)) / V(R).
double expected_increment(const EpidemicState& state, double theta, const LatticeParams& params);

/// Number of neighbours y of x with y in eta_n ∪ rho_n.
std::int64_t occupied_neighbors(const EpidemicState& state, const Site& x,
                                const LatticeParams& params);

/// Runs the rho0-blocked and unblocked epidemics from eta0 on the same
/// oracle; true iff the blocked cumulative set is contained in the
/// unblocked one at every n <= horizon.
bool monotone_coupling_check(std::span<const Site> eta0, std::span<const Site> rho0,
                             const BondOracle& oracle, const LatticeParams& params,
                             std::int64_t horizon);

/// With rho0 empty: the cumulative set from eta0 is contained in the union
/// of the cumulative sets from each single site of eta0, at every
/// n <= horizon, on the same oracle.
bool union_bound_check(std::span<const Site> eta0, const BondOracle& oracle,
                       const LatticeParams& params, std::int64_t horizon);

/// p = lambda / V(R) with lambda = 1 + theta / R^(d-1).
double infection_probability(double theta, const LatticeParams& params);

}  // namespace rangeperc
