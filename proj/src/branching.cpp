// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/branching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rangeperc/parallel.hpp"

namespace rangeperc {

BrwPopulation BrwPopulation::unit_mass(const Site& x) {
  BrwPopulation pop;
  pop.counts_.emplace_back(x, 1);
  pop.total_ = 1;
  return pop;
}

BrwPopulation BrwPopulation::from_counts(std::vector<std::pair<Site, std::int64_t>> counts,
                                         std::int64_t generation) {
  std::sort(counts.begin(), counts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  BrwPopulation pop;
  pop.n_ = generation;
  for (const auto& [site, c] : counts) {
    if (c <= 0) continue;
    if (!pop.counts_.empty() && pop.counts_.back().first == site) {
      pop.counts_.back().second += c;
    } else {
      pop.counts_.emplace_back(site, c);
    }
    pop.total_ += c;
  }
  return pop;
}

std::int64_t BrwPopulation::at(const Site& x) const {
  auto it = std::lower_bound(counts_.begin(), counts_.end(), x,
                             [](const auto& entry, const Site& s) { return entry.first < s; });
  return (it != counts_.end() && it->first == x) ? it->second : 0;
}

void RangeTracker::absorb(const BrwPopulation& pop) {
  for (const auto& [site, c] : pop.counts()) {
    visited_.insert(site);
    max_linf_ = std::max(max_linf_, linf_norm(site));
  }
}

void RangeTracker::absorb(std::span<const Site> sites) {
  for (const auto& site : sites) {
    visited_.insert(site);
    max_linf_ = std::max(max_linf_, linf_norm(site));
  }
}

void branch_particle(const Site& x, StreamRng& rng, const LatticeParams& params, double p,
                     std::vector<std::int64_t>& scratch, std::vector<Site>& out) {
  const auto deltas = params.displacements();
  const std::int64_t m = sample_binomial(rng, params.volume(), p);
  sample_distinct(rng, params.volume(), m, scratch);
  for (auto j : scratch) out.push_back(translate(x, deltas[static_cast<std::size_t>(j)]));
}

namespace {

BrwPopulation collect(std::vector<Site>& children, std::int64_t generation) {
  std::sort(children.begin(), children.end());
  std::vector<std::pair<Site, std::int64_t>> counts;
  for (const auto& s : children) {
    if (!counts.empty() && counts.back().first == s) {
      ++counts.back().second;
    } else {
      counts.emplace_back(s, 1);
    }
  }
  return BrwPopulation::from_counts(std::move(counts), generation);
}

}  // namespace

BrwPopulation brw_step(const BrwPopulation& pop, StreamRng& rng, const LatticeParams& params,
                       double p) {
  std::vector<Site> children;
  std::vector<std::int64_t> scratch;
  for (const auto& [site, c] : pop.counts()) {
    for (std::int64_t i = 0; i < c; ++i) branch_particle(site, rng, params, p, scratch, children);
  }
  return collect(children, pop.generation() + 1);
}

CoupledState CoupledState::initial() {
  const Site origin[] = {Site::origin()};
  return CoupledState{EpidemicState::initial(origin), BrwPopulation::unit_mass(Site::origin())};
}

void coupled_step(CoupledState& cs, const BondOracle& oracle, StreamRng& rng,
                  const LatticeParams& params) {
  auto& epidemic = cs.epidemic;
  const double p = oracle.p();
  std::vector<Site> children;
  std::vector<std::int64_t> scratch;

  for (const auto& x : epidemic.infected()) {
    if (cs.brw.at(x) < 1) throw std::logic_error("coupled_step: infected site without a particle");
    for (const auto& delta : params.displacements()) {
      const Site y = translate(x, delta);
      const bool frontier = epidemic.was_susceptible(y);
      const bool born = frontier ? oracle.bond(x, y) : rng.uniform01() < p;
      if (!born) continue;
      children.push_back(y);
      if (frontier) epidemic.try_infect(y);
    }
  }
  for (const auto& [site, c] : cs.brw.counts()) {
    const std::int64_t others = c - (epidemic.is_infected(site) ? 1 : 0);
    for (std::int64_t i = 0; i < others; ++i) {
      branch_particle(site, rng, params, p, scratch, children);
    }
  }
  epidemic.commit_generation();
  cs.brw = collect(children, cs.brw.generation() + 1);
}

std::int64_t coupling_violations(const CoupledState& cs) {
  std::int64_t bad = 0;
  for (const auto& x : cs.epidemic.infected()) {
    if (cs.brw.at(x) < 1) ++bad;
  }
  return bad;
}

Site rw_step(const Site& x, StreamRng& rng, const LatticeParams& params) {
  const auto deltas = params.displacements();
  return translate(x, deltas[rng.below(static_cast<std::uint64_t>(deltas.size()))]);
}

std::vector<BoxExitRow> rw_box_exit_prob(const LatticeParams& params, std::int64_t n, double K,
                                         std::int64_t trials, std::uint64_t seed,
                                         unsigned workers) {
  if (!(K > 0.0) || n < 1 || trials < 1) {
    throw std::invalid_argument("rw_box_exit_prob: need K > 0, n >= 1, trials >= 1");
  }
  const double threshold = K * std::sqrt(static_cast<double>(n)) * params.range();
  const auto slots = worker_slots(trials, workers);
  const auto len = static_cast<std::size_t>(n + 1);
  struct Acc {
    std::vector<std::int64_t> hits, hits_by, sum, sum_sq;
  };
  std::vector<Acc> acc(slots, Acc{std::vector<std::int64_t>(len), std::vector<std::int64_t>(len),
                                  std::vector<std::int64_t>(len), std::vector<std::int64_t>(len)});
  parallel_for(trials, slots, [&](std::int64_t t, unsigned w) {
    StreamRng rng(seed, static_cast<std::uint64_t>(t), StreamTag::kWalk);
    Site x = Site::origin();
    bool exited = false;
    auto& a = acc[w];
    for (std::int64_t k = 1; k <= n; ++k) {
      x = rw_step(x, rng, params);
      const bool out = static_cast<double>(linf_norm(x)) >= threshold;
      exited = exited || out;
      const auto kk = static_cast<std::size_t>(k);
      a.hits[kk] += out;
      a.hits_by[kk] += exited;
      a.sum[kk] += x.c[0];
      a.sum_sq[kk] += std::int64_t{x.c[0]} * x.c[0];
    }
  });
  const double bound = 2.0 * params.dim() * std::exp(-K * K / 2.0);
  const double r = params.range();
  std::vector<BoxExitRow> rows;
  for (std::int64_t k = 1; k <= n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    BoxExitRow row;
    row.k = k;
    row.trials = trials;
    std::int64_t sum = 0, sum_sq = 0;
    for (const auto& a : acc) {
      row.hits += a.hits[kk];
      row.hits_by_k += a.hits_by[kk];
      sum += a.sum[kk];
      sum_sq += a.sum_sq[kk];
    }
    const double tn = static_cast<double>(trials);
    row.p_hat = static_cast<double>(row.hits) / tn;
    row.p_hat_by_k = static_cast<double>(row.hits_by_k) / tn;
    row.bound = bound;
    row.vacuous = bound >= 1.0;
    const double mean = static_cast<double>(sum) / tn;
    const double var = trials > 1 ? (static_cast<double>(sum_sq) - tn * mean * mean) / (tn - 1) : 0;
    row.mean_axis0 = mean / r;
    row.se_axis0 = std::sqrt(std::max(0.0, var) / tn) / r;
    rows.push_back(row);
  }
  return rows;
}

RangeTailReport range_tail(const LatticeParams& params, double theta, std::int64_t n,
                           std::span<const double> r_grid, std::int64_t trials,
                           std::uint64_t seed, unsigned workers, const RangeTailRegime& regime,
                           std::int64_t population_cap) {
  if (!(theta > 0.0) || n < 1 || trials < 1 || r_grid.empty()) {
    throw std::invalid_argument("range_tail: need theta > 0, n >= 1, trials >= 1, nonempty grid");
  }
  if (static_cast<double>(n) > regime.c * static_cast<double>(params.scale())) {
    throw std::invalid_argument("range_tail: n exceeds c R^(d-1)");
  }
  const double r_limit = regime.K * std::sqrt(static_cast<double>(n));
  for (double r : r_grid) {
    if (!(r >= 0.0) || r > r_limit) throw std::invalid_argument("range_tail: r outside [0, K sqrt(n)]");
  }
  const double p = infection_probability(theta, params);
  const double r_max = *std::max_element(r_grid.begin(), r_grid.end());
  const double stop_reach = r_max * params.range();

  std::vector<std::int64_t> reach(static_cast<std::size_t>(trials), 0);
  std::vector<char> truncated(static_cast<std::size_t>(trials), 0);
  parallel_for(trials, workers, [&](std::int64_t t, unsigned) {
    StreamRng rng(seed, static_cast<std::uint64_t>(t), StreamTag::kBranching);
    auto pop = BrwPopulation::unit_mass(Site::origin());
    std::int64_t far = 0;
    for (std::int64_t k = 1; k <= n && !pop.empty(); ++k) {
      pop = brw_step(pop, rng, params, p);
      for (const auto& [site, c] : pop.counts()) far = std::max(far, linf_norm(site));
      if (static_cast<double>(far) > stop_reach) break;  // every event decided
      if (pop.total() > population_cap) {
        truncated[static_cast<std::size_t>(t)] = 1;
        break;
      }
    }
    reach[static_cast<std::size_t>(t)] = far;
  });

  RangeTailReport report;
  std::vector<double> sorted_grid(r_grid.begin(), r_grid.end());
  for (double r : r_grid) {
    RangeTailRow row;
    row.r = r;
    row.trials = trials;
    const double w = r * params.range();
    for (auto far : reach) row.hits += static_cast<double>(far) > w;
    row.p_hat = static_cast<double>(row.hits) / static_cast<double>(trials);
    row.scaled = (r + 1.0) * (r + 1.0) * row.p_hat;
    report.rows.push_back(row);
  }
  std::sort(sorted_grid.begin(), sorted_grid.end());
  for (auto far : reach) {
    bool previous = true;
    for (double r : sorted_grid) {
      const bool out = static_cast<double>(far) > r * params.range();
      if (out && !previous) report.nested = false;
      previous = out;
    }
  }
  for (auto flag : truncated) report.truncated_trials += flag;
  return report;
}

}  // namespace rangeperc
