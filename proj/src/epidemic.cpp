// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/epidemic.hpp"

#include <absl/container/flat_hash_set.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace rangeperc {

std::string_view to_string(StepMode mode) {
  return mode == StepMode::kBondExact ? "bond-exact" : "aggregate-fast";
}

StepMode parse_step_mode(std::string_view text) {
  if (text == "bond-exact") return StepMode::kBondExact;
  if (text == "aggregate-fast") return StepMode::kAggregateFast;
  throw std::invalid_argument("unknown mode '" + std::string(text) +
                              "' (expected bond-exact or aggregate-fast)");
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kExtinct: return "extinct";
    case Outcome::kMassCap: return "mass-cap";
    case Outcome::kGenCap: return "gen-cap";
    case Outcome::kBoxExit: return "box-exit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// EpidemicState

EpidemicState EpidemicState::initial(std::span<const Site> eta0, std::span<const Site> rho0) {
  EpidemicState s;
  for (const auto& x : rho0) {
    if (s.tau_.emplace(x, kInitiallyRecovered).second) ++s.initially_recovered_;
  }
  for (const auto& x : eta0) {
    auto [it, inserted] = s.tau_.emplace(x, 0);
    if (!inserted) {
      if (it->second == kInitiallyRecovered) {
        throw std::invalid_argument("initial infected and recovered sets intersect");
      }
      continue;  // duplicate in eta0
    }
    s.infected_.push_back(x);
    s.history_.push_back(x);
  }
  s.cumulative_ = static_cast<std::int64_t>(s.infected_.size());
  return s;
}

bool EpidemicState::is_infected(const Site& x) const {
  auto it = tau_.find(x);
  return it != tau_.end() && it->second == n_;
}

bool EpidemicState::is_recovered(const Site& x) const {
  auto it = tau_.find(x);
  return it != tau_.end() && it->second < n_;
}

bool EpidemicState::is_susceptible(const Site& x) const { return was_susceptible(x); }

std::size_t EpidemicState::recovered_count() const {
  return initially_recovered_ + static_cast<std::size_t>(cumulative_) - infected_.size();
}

std::int64_t EpidemicState::infection_time(const Site& x) const {
  auto it = tau_.find(x);
  if (it == tau_.end() || it->second == kInitiallyRecovered || it->second > n_) {
    return kNeverInfected;
  }
  return it->second;
}

std::vector<Site> EpidemicState::recovered() const {
  std::vector<Site> out;
  out.reserve(recovered_count());
  for (const auto& [site, tau] : tau_) {
    if (tau < n_) out.push_back(site);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<InfectionRecord> EpidemicState::infection_records() const {
  std::vector<InfectionRecord> out;
  out.reserve(history_.size());
  for (const auto& x : history_) out.push_back({x, tau_.at(x)});
  return out;
}

bool EpidemicState::was_susceptible(const Site& y) const {
  auto it = tau_.find(y);
  return it == tau_.end() || it->second > n_;
}

bool EpidemicState::try_infect(const Site& y) {
  auto [it, inserted] = tau_.try_emplace(y, n_ + 1);
  if (!inserted) return false;
  pending_.push_back(y);
  return true;
}

void EpidemicState::commit_generation() {
  history_.insert(history_.end(), pending_.begin(), pending_.end());
  infected_.swap(pending_);
  pending_.clear();
  ++n_;
  cumulative_ += static_cast<std::int64_t>(infected_.size());
}

// ---------------------------------------------------------------------------
// Dynamics

namespace {

void check_headroom(const Site& x, const LatticeParams& params) {
  constexpr std::int64_t kLimit = std::numeric_limits<std::int32_t>::max();
  if (linf_norm(x) + params.range() > kLimit) throw LatticeError("site coordinate overflow");
}

}  // namespace

std::vector<FrontierEdge> frontier(const EpidemicState& state, const LatticeParams& params) {
  std::vector<FrontierEdge> out;
  for (const auto& x : state.infected()) {
    check_headroom(x, params);
    for (const auto& delta : params.displacements()) {
      const Site y = translate(x, delta);
      if (state.was_susceptible(y)) out.push_back({x, y});
    }
  }
  return out;
}

void advance(EpidemicState& state, const BondOracle& oracle, const LatticeParams& params) {
  // Bonds are evaluated before the occupancy lookup: only ~lambda bonds per
  // site are open, so most lookups are skipped. Non-frontier bonds are
  // evaluated but never influence the state.
  const auto deltas = params.displacements();
  for (const auto& x : state.infected()) {
    check_headroom(x, params);
    oracle.for_each_open(x, deltas, [&](const Site& y) { state.try_infect(y); });
  }
  state.commit_generation();
}

void advance_aggregate(EpidemicState& state, double p, StreamRng& rng,
                       const LatticeParams& params) {
  absl::flat_hash_map<Site, std::int64_t> index;
  std::vector<Site> targets;
  std::vector<std::int64_t> counts;
  for (const auto& x : state.infected()) {
    check_headroom(x, params);
    for (const auto& delta : params.displacements()) {
      const Site y = translate(x, delta);
      if (!state.was_susceptible(y)) continue;
      auto [it, inserted] = index.try_emplace(y, static_cast<std::int64_t>(targets.size()));
      if (inserted) {
        targets.push_back(y);
        counts.push_back(1);
      } else {
        ++counts[static_cast<std::size_t>(it->second)];
      }
    }
  }
  const double log_q = std::log1p(-p);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double u = rng.uniform01();
    const double hit = p >= 1.0 ? 1.0 : -std::expm1(static_cast<double>(counts[i]) * log_q);
    if (u < hit) state.try_infect(targets[i]);
  }
  state.commit_generation();
}

EpidemicState step(EpidemicState state, const BondOracle& oracle, const LatticeParams& params) {
  advance(state, oracle, params);
  return state;
}

StopRule StopRule::defaults(const LatticeParams& params) {
  StopRule rule;
  rule.mass_cap = kDefaultMassCap;
  rule.gen_cap = 10 * params.scale();
  return rule;
}

std::optional<std::int64_t> TrialResult::extinction_time() const {
  if (outcome != Outcome::kExtinct) return std::nullopt;
  return final_generation;
}

TrialResult run_trial(EpidemicState& state, const BondOracle& oracle, const LatticeParams& params,
                      const StopRule& stop, const TrialOptions& options) {
  TrialResult result;
  std::optional<StreamRng> rng;
  if (options.mode == StepMode::kAggregateFast) {
    rng.emplace(oracle.master_seed(), oracle.trial_index(), StreamTag::kAggregate);
  }
  std::int64_t reach = 0;
  for (;;) {
    bool outside = false;
    for (const auto& x : state.infected()) {
      const auto norm = linf_norm(x);
      reach = std::max(reach, norm);
      if (stop.box && !stop.box->contains(x)) outside = true;
    }
    result.eta_sizes.push_back(static_cast<std::int64_t>(state.infected().size()));
    result.cumulative.push_back(state.cumulative());
    result.max_linf.push_back(reach);
    if (options.keep_shells) result.shells.push_back(state.infected());

    if (state.extinct()) {
      result.outcome = Outcome::kExtinct;
      break;
    }
    if (stop.mass_cap > 0 && state.cumulative() > stop.mass_cap) {
      result.outcome = Outcome::kMassCap;
      break;
    }
    if (outside) {
      result.outcome = Outcome::kBoxExit;
      break;
    }
    if (stop.gen_cap > 0 && state.generation() >= stop.gen_cap) {
      result.outcome = Outcome::kGenCap;
      break;
    }
    if (options.mode == StepMode::kBondExact) {
      advance(state, oracle, params);
    } else {
      advance_aggregate(state, oracle.p(), *rng, params);
    }
  }
  result.final_generation = state.generation();
  return result;
}

TrialResult run_trial(std::span<const Site> eta0, std::span<const Site> rho0,
                      const BondOracle& oracle, const LatticeParams& params, const StopRule& stop,
                      const TrialOptions& options) {
  auto state = EpidemicState::initial(eta0, rho0);
  return run_trial(state, oracle, params, stop, options);
}

// ---------------------------------------------------------------------------
// Percolation cluster (independent breadth-first implementation)

namespace {
struct SiteHash {
  std::size_t operator()(const Site& s) const {
    std::uint64_t h = mix64(static_cast<std::uint32_t>(s.c[0]));
    h = mix64(h ^ static_cast<std::uint32_t>(s.c[1]));
    return static_cast<std::size_t>(mix64(h ^ static_cast<std::uint32_t>(s.c[2])));
  }
};
}  // namespace

std::vector<Site> ClusterResult::shell(std::int64_t n) const {
  std::vector<Site> out;
  for (const auto& [site, label] : labels) {
    if (label == n) out.push_back(site);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ClusterResult percolation_cluster(std::span<const Site> origins, const BondOracle& oracle,
                                  const LatticeParams& params, std::int64_t cap,
                                  std::span<const Site> blocked) {
  if (cap < 1) throw std::invalid_argument("percolation_cluster: cap must be >= 1");
  const std::unordered_set<Site, SiteHash> closed(blocked.begin(), blocked.end());
  std::unordered_map<Site, std::int64_t, SiteHash> label;
  ClusterResult result;
  std::deque<Site> queue;
  for (const auto& o : origins) {
    if (closed.count(o) || label.count(o)) continue;
    label.emplace(o, 0);
    result.labels.emplace_back(o, 0);
    queue.push_back(o);
  }
  std::int64_t current = 0;
  while (!queue.empty()) {
    const Site u = queue.front();
    const std::int64_t du = label.at(u);
    if (du != current) {
      // Shell `current` is fully labelled; shell du is complete as well.
      current = du;
      if (static_cast<std::int64_t>(result.labels.size()) >= cap) {
        result.truncated = true;
        break;
      }
    }
    queue.pop_front();
    for (const auto& v : neighbors(u, params)) {
      if (label.count(v) || closed.count(v)) continue;
      if (oracle.uniform01(canonical_edge(u, v)) < oracle.p()) {
        label.emplace(v, du + 1);
        result.labels.emplace_back(v, du + 1);
        queue.push_back(v);
      }
    }
  }
  return result;
}

ClusterResult percolation_cluster(const Site& origin, const BondOracle& oracle,
                                  const LatticeParams& params, std::int64_t cap) {
  const Site origins[] = {origin};
  return percolation_cluster(origins, oracle, params, cap);
}

// ---------------------------------------------------------------------------
// Increment identity and couplings

double infection_probability(double theta, const LatticeParams& params) {
  const double lambda = 1.0 + theta / static_cast<double>(params.scale());
  return lambda / static_cast<double>(params.volume());
}

std::int64_t occupied_neighbors(const EpidemicState& state, const Site& x,
                                const LatticeParams& params) {
  std::int64_t count = 0;
  for (const auto& delta : params.displacements()) {
    if (!state.was_susceptible(translate(x, delta))) ++count;
  }
  return count;
}

double expected_increment(const EpidemicState& state, double theta, const LatticeParams& params) {
  const double eps = theta / static_cast<double>(params.scale());
  std::int64_t interference = 0;
  for (const auto& x : state.infected()) interference += occupied_neighbors(state, x, params);
  const double eta = static_cast<double>(state.infected().size());
  return eps * eta -
         (1.0 + eps) * static_cast<double>(interference) / static_cast<double>(params.volume());
}

bool monotone_coupling_check(std::span<const Site> eta0, std::span<const Site> rho0,
                             const BondOracle& oracle, const LatticeParams& params,
                             std::int64_t horizon) {
  auto blocked = EpidemicState::initial(eta0, rho0);
  auto free = EpidemicState::initial(eta0);
  for (std::int64_t n = 0;; ++n) {
    for (const auto& x : blocked.infected()) {
      if (free.infection_time(x) > n) return false;
    }
    if (n == horizon) break;
    if (blocked.extinct()) break;  // nothing new can enter the blocked set
    advance(blocked, oracle, params);
    advance(free, oracle, params);
  }
  return true;
}

bool union_bound_check(std::span<const Site> eta0, const BondOracle& oracle,
                       const LatticeParams& params, std::int64_t horizon) {
  auto joint = EpidemicState::initial(eta0);
  std::vector<EpidemicState> singles;
  for (const auto& x : eta0) {
    const Site one[] = {x};
    singles.push_back(EpidemicState::initial(one));
  }
  for (std::int64_t n = 0;; ++n) {
    for (const auto& y : joint.infected()) {
      const bool covered = std::any_of(singles.begin(), singles.end(), [&](const auto& s) {
        return s.infection_time(y) <= n;
      });
      if (!covered) return false;
    }
    if (n == horizon || joint.extinct()) break;
    advance(joint, oracle, params);
    for (auto& s : singles) advance(s, oracle, params);
  }
  return true;
}

}  // namespace rangeperc
