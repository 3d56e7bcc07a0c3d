// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rangeperc/gw.hpp"
#include "rangeperc/parallel.hpp"
#include "rangeperc/tables.hpp"

namespace rangeperc {

bool SuiteReport::pass() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void SuiteReport::add(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok, std::move(detail)});
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed ^ 0x3c6ef372fe94f82bULL) + index);
}

namespace {

std::string fmt(double x) { return format_number(x); }

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("accumulator overflow");
  return out;
}

std::int64_t sat_sq(std::int64_t a) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, a, &out)) throw std::overflow_error("accumulator overflow");
  return out;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(std::int64_t sum, std::int64_t sum_sq, std::int64_t n) {
  const double dn = static_cast<double>(n);
  Moments m;
  m.mean = static_cast<double>(sum) / dn;
  if (n > 1) {
    const double var =
        std::max(0.0, (static_cast<double>(sum_sq) - dn * m.mean * m.mean) / (dn - 1.0));
    m.se = std::sqrt(var / dn);
  }
  return m;
}

}  // namespace

std::int64_t compare_shells(const TrialResult& trial, const ClusterResult& cluster) {
  const std::int64_t last_shell = static_cast<std::int64_t>(trial.shells.size()) - 1;
  const std::int64_t upto = std::min(last_shell, cluster.max_label());
  for (std::int64_t n = 0; n <= upto; ++n) {
    auto shell = trial.shells[static_cast<std::size_t>(n)];
    std::sort(shell.begin(), shell.end());
    if (shell != cluster.shell(n)) return -1;
  }
  if (trial.outcome == Outcome::kExtinct) {
    // eta_final is empty, so the cluster must end exactly one shell earlier.
    if (cluster.truncated || cluster.max_label() != trial.final_generation - 1) return -1;
  } else if (!cluster.truncated && cluster.max_label() < trial.final_generation) {
    return -1;  // epidemic still alive where the cluster has no sites
  }
  return upto + 1;
}

SuiteReport verify_equivalence(const EquivalenceParams& params, std::uint64_t seed,
                               unsigned workers) {
  SuiteReport report{"equivalence", {}, CsvTable({"d", "R", "p", "trials", "mismatches",
                                                  "generations_compared"})};
  std::uint64_t combo = 0;
  std::int64_t total_mismatch = 0;
  for (int d : params.dims) {
    for (int R : params.ranges) {
      for (double p : params.ps) {
        const LatticeParams lattice(d, R);
        const std::uint64_t s = derive_seed(seed, combo++);
        StopRule stop;
        stop.mass_cap = params.mass_cap;
        stop.gen_cap = 1'000'000;
        TrialOptions opts;
        opts.keep_shells = true;
        std::vector<std::int64_t> compared(static_cast<std::size_t>(params.trials));
        parallel_for(params.trials, workers, [&](std::int64_t i, unsigned) {
          const BondOracle oracle(s, static_cast<std::uint64_t>(i), p);
          const Site origin = Site::origin();
          const TrialResult trial = run_trial(std::span(&origin, 1), {}, oracle, lattice, stop, opts);
          const ClusterResult cluster = percolation_cluster(origin, oracle, lattice, params.mass_cap);
          compared[static_cast<std::size_t>(i)] = compare_shells(trial, cluster);
        });
        const std::int64_t mismatches = std::count(compared.begin(), compared.end(), -1);
        std::int64_t gens = 0;
        for (auto c : compared) gens += std::max<std::int64_t>(c, 0);
        total_mismatch += mismatches;
        report.table.add(d, R, p, params.trials, mismatches, gens);
      }
    }
  }
  report.add("eta_n equals the distance-n cluster shell", total_mismatch == 0,
             std::to_string(total_mismatch) + " mismatching trials over " +
                 std::to_string(combo) + " parameter sets");
  return report;
}

SuiteReport verify_coupling(const CouplingParams& params, std::uint64_t seed, unsigned workers) {
  SuiteReport report{"coupling", {}, CsvTable({"d", "R", "theta", "trials", "violations",
                                               "reached_horizon", "epidemic_extinct",
                                               "population_capped"})};
  std::int64_t total_violations = 0;
  std::uint64_t combo = 0;
  for (int R : params.ranges) {
    const LatticeParams lattice(params.d, R);
    const double p = infection_probability(params.theta, lattice);
    const std::uint64_t s = derive_seed(seed, combo++);
    // 0 reached the horizon, 1 epidemic died out, 2 population cap
    std::vector<std::uint8_t> ending(static_cast<std::size_t>(params.trials));
    std::vector<std::int64_t> violations(static_cast<std::size_t>(params.trials));
    parallel_for(params.trials, workers, [&](std::int64_t i, unsigned) {
      const BondOracle oracle(s, static_cast<std::uint64_t>(i), p);
      StreamRng rng(s, static_cast<std::uint64_t>(i), StreamTag::kCoupledFill);
      CoupledState cs = CoupledState::initial();
      std::int64_t bad = coupling_violations(cs);
      std::uint8_t end = 0;
      for (std::int64_t n = 0; n < params.horizon; ++n) {
        if (cs.epidemic.extinct()) {
          end = 1;  // eta stays empty, nothing left to check
          break;
        }
        if (cs.brw.total() > params.population_cap) {
          end = 2;
          break;
        }
        coupled_step(cs, oracle, rng, lattice);
        bad += coupling_violations(cs);
        if (static_cast<std::int64_t>(cs.epidemic.infected().size()) > cs.brw.total()) ++bad;
      }
      ending[static_cast<std::size_t>(i)] = end;
      violations[static_cast<std::size_t>(i)] = bad;
    });
    std::int64_t v = 0;
    for (auto b : violations) v += b;
    total_violations += v;
    report.table.add(params.d, R, params.theta, params.trials, v,
                     std::count(ending.begin(), ending.end(), std::uint8_t{0}),
                     std::count(ending.begin(), ending.end(), std::uint8_t{1}),
                     std::count(ending.begin(), ending.end(), std::uint8_t{2}));
  }
  report.add("eta_n(x) <= Z_n(x) at every site and generation", total_violations == 0,
             std::to_string(total_violations) + " violations");
  return report;
}

SuiteReport verify_increment(const IncrementParams& params, std::uint64_t seed, unsigned workers) {
  SuiteReport report{"increment", {}, CsvTable({"d", "R", "theta", "state", "generation", "eta",
                                                "rho", "formula", "mc_mean", "se", "z",
                                                "edge_mean", "edge_se", "edge_z", "exact_mean",
                                                "exact_z"})};
  double worst = 0.0;
  double worst_edge = 0.0;
  double worst_exact = 0.0;
  std::int64_t count = 0;
  std::uint64_t combo = 0;
  auto zscore = [](const Moments& m, double target) {
    if (m.se > 0.0) return (m.mean - target) / m.se;
    return std::abs(m.mean - target) < 1e-12 ? 0.0 : INFINITY;
  };
  for (int R : params.ranges) {
    for (double theta : params.thetas) {
      const LatticeParams lattice(params.d, R);
      const double p = infection_probability(theta, lattice);
      const std::uint64_t grow_seed = derive_seed(seed, 2 * combo);
      const std::uint64_t replay_base = derive_seed(seed, 2 * combo + 1);
      ++combo;
      const Site origin = Site::origin();
      for (std::int64_t s = 0; s < params.states; ++s) {
        // Frozen state: grow from the origin for 1..max_growth generations,
        // skipping seeds that die out before then.
        const std::int64_t gens = 1 + s % std::max<std::int64_t>(1, params.max_growth);
        StopRule grow;
        grow.gen_cap = gens;
        EpidemicState frozen = EpidemicState::initial(std::span(&origin, 1));
        for (std::uint64_t attempt = 0;; ++attempt) {
          frozen = EpidemicState::initial(std::span(&origin, 1));
          const BondOracle oracle(grow_seed, static_cast<std::uint64_t>(s) + attempt * 1'000'003ULL, p);
          run_trial(frozen, oracle, lattice, grow);
          if (!frozen.extinct()) break;
          if (attempt > 10'000) throw std::runtime_error("increment suite: no surviving frozen state");
        }
        const double formula = expected_increment(frozen, theta, lattice);
        const auto eta = static_cast<std::int64_t>(frozen.infected().size());

        // The formula is the conditional mean of the number of open frontier
        // edges minus |eta_n|. A site reached through k > 1 open edges is
        // infected once, so the set increment has mean
        // sum_y (1 - (1-p)^|D_n(y)|) - |eta_n| instead.
        const std::vector<FrontierEdge> edges = frontier(frozen, lattice);
        absl::flat_hash_map<Site, std::int64_t> in_degree;
        for (const auto& e : edges) ++in_degree[e.to];
        // Summed by in-degree: hash-map order is not reproducible.
        std::vector<std::int64_t> sites_with(1, 0);
        for (const auto& [y, k] : in_degree) {
          if (static_cast<std::size_t>(k) >= sites_with.size()) sites_with.resize(static_cast<std::size_t>(k) + 1, 0);
          ++sites_with[static_cast<std::size_t>(k)];
        }
        double exact = -static_cast<double>(eta);
        for (std::size_t k = 1; k < sites_with.size(); ++k) {
          exact += static_cast<double>(sites_with[k]) * -std::expm1(static_cast<double>(k) * std::log1p(-p));
        }

        const std::uint64_t replay_seed = derive_seed(replay_base, static_cast<std::uint64_t>(s));
        const unsigned slots = worker_slots(params.replays, workers);
        std::vector<std::int64_t> sum(slots, 0), sum_sq(slots, 0), esum(slots, 0), esum_sq(slots, 0);
        parallel_for(params.replays, slots, [&](std::int64_t j, unsigned w) {
          const BondOracle oracle(replay_seed, static_cast<std::uint64_t>(j), p);
          const EpidemicState next = step(frozen, oracle, lattice);
          const std::int64_t delta = static_cast<std::int64_t>(next.infected().size()) - eta;
          std::int64_t open = 0;
          for (const auto& e : edges) open += oracle.bond(e.from, e.to);
          const std::int64_t edelta = open - eta;
          sum[w] = sat_add(sum[w], delta);
          sum_sq[w] = sat_add(sum_sq[w], sat_sq(delta));
          esum[w] = sat_add(esum[w], edelta);
          esum_sq[w] = sat_add(esum_sq[w], sat_sq(edelta));
        });
        std::int64_t s1 = 0, s2 = 0, e1 = 0, e2 = 0;
        for (unsigned w = 0; w < slots; ++w) {
          s1 = sat_add(s1, sum[w]);
          s2 = sat_add(s2, sum_sq[w]);
          e1 = sat_add(e1, esum[w]);
          e2 = sat_add(e2, esum_sq[w]);
        }
        const Moments m = moments(s1, s2, params.replays);
        const Moments me = moments(e1, e2, params.replays);
        const double z = zscore(m, formula);
        const double z_edge = zscore(me, formula);
        const double z_exact = zscore(m, exact);
        worst = std::max(worst, std::abs(z));
        worst_edge = std::max(worst_edge, std::abs(z_edge));
        worst_exact = std::max(worst_exact, std::abs(z_exact));
        ++count;
        report.table.add(params.d, R, theta, s, frozen.generation(), eta,
                         static_cast<std::int64_t>(frozen.recovered_count()), formula, m.mean, m.se,
                         z, me.mean, me.se, z_edge, exact, z_exact);
      }
    }
  }
  const std::string over = " over " + std::to_string(count) + " states";
  report.add("|eta_{n+1}| - |eta_n|: |z| <= " + fmt(params.z_max) + " against the increment formula",
             worst <= params.z_max, "max |z| = " + fmt(worst) + over);
  report.add("open frontier edges - |eta_n|: |z| <= " + fmt(params.z_max) +
                 " against the increment formula",
             worst_edge <= params.z_max, "max |z| = " + fmt(worst_edge) + over);
  report.add("|eta_{n+1}| - |eta_n|: |z| <= " + fmt(params.z_max) +
                 " against sum_y 1-(1-p)^|D_n(y)| - |eta_n|",
             worst_exact <= params.z_max, "max |z| = " + fmt(worst_exact) + over);
  return report;
}

std::vector<double> half_space_law(const LatticeParams& params, std::int64_t k_max) {
  const std::int64_t R = params.range();
  std::int64_t side = 1;
  for (int i = 1; i < params.dim(); ++i) side *= 2 * R + 1;
  const double V = static_cast<double>(params.volume());
  // P(first coordinate of a step = j): side choices of the other
  // coordinates, minus the zero step when j = 0.
  std::vector<double> step(static_cast<std::size_t>(2 * R + 1));
  for (std::int64_t j = -R; j <= R; ++j) {
    step[static_cast<std::size_t>(j + R)] = static_cast<double>(side - (j == 0 ? 1 : 0)) / V;
  }
  std::vector<double> law{1.0};  // offset -k R .. k R
  std::vector<double> out{0.0};
  for (std::int64_t k = 1; k <= k_max; ++k) {
    std::vector<double> next(law.size() + static_cast<std::size_t>(2 * R), 0.0);
    for (std::size_t a = 0; a < law.size(); ++a) {
      for (std::size_t b = 0; b < step.size(); ++b) next[a + b] += law[a] * step[b];
    }
    law = std::move(next);
    const std::size_t centre = static_cast<std::size_t>(k * R);
    double positive = 0.0;
    for (std::size_t i = centre + 1; i < law.size(); ++i) positive += law[i];
    out.push_back(positive);
  }
  return out;
}

SuiteReport verify_mean_measure(const MeanMeasureParams& params, std::uint64_t seed,
                                unsigned workers) {
  SuiteReport report{"mean-measure", {}, CsvTable({"k", "set", "target", "mc_mean", "se", "z"})};
  const LatticeParams lattice(params.d, params.R);
  const double p = infection_probability(params.theta, lattice);
  const double lambda = p * static_cast<double>(lattice.volume());
  const auto K = static_cast<std::size_t>(params.k_max) + 1;
  const unsigned slots = worker_slots(params.trials, workers);
  struct Acc {
    std::vector<std::int64_t> total, total_sq, half, half_sq;
  };
  std::vector<Acc> acc(slots, Acc{std::vector<std::int64_t>(K), std::vector<std::int64_t>(K),
                                  std::vector<std::int64_t>(K), std::vector<std::int64_t>(K)});
  parallel_for(params.trials, slots, [&](std::int64_t t, unsigned w) {
    StreamRng rng(seed, static_cast<std::uint64_t>(t), StreamTag::kBranching);
    auto pop = BrwPopulation::unit_mass(Site::origin());
    auto& a = acc[w];
    for (std::size_t k = 0; k < K; ++k) {
      if (k > 0) pop = brw_step(pop, rng, lattice, p);
      std::int64_t half = 0;
      for (const auto& [site, c] : pop.counts()) {
        if (site.c[0] > 0) half += c;
      }
      a.total[k] = sat_add(a.total[k], pop.total());
      a.total_sq[k] = sat_add(a.total_sq[k], sat_sq(pop.total()));
      a.half[k] = sat_add(a.half[k], half);
      a.half_sq[k] = sat_add(a.half_sq[k], sat_sq(half));
    }
  });
  const auto law = half_space_law(lattice, params.k_max);
  bool total_ok = true;
  bool half_ok = true;
  double worst_total = 0.0, worst_half = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t s = 0, s2 = 0, h = 0, h2 = 0;
    for (const auto& a : acc) {
      s = sat_add(s, a.total[k]);
      s2 = sat_add(s2, a.total_sq[k]);
      h = sat_add(h, a.half[k]);
      h2 = sat_add(h2, a.half_sq[k]);
    }
    const double growth = std::pow(lambda, static_cast<double>(k));
    const Moments mt = moments(s, s2, params.trials);
    const double zt = mt.se > 0 ? (mt.mean - growth) / mt.se : (mt.mean == growth ? 0.0 : INFINITY);
    report.table.add(static_cast<std::int64_t>(k), "all", growth, mt.mean, mt.se, zt);
    worst_total = std::max(worst_total, std::abs(zt));
    total_ok = total_ok && std::abs(zt) <= params.se_mult;
    const bool listed = std::find(params.half_space_ks.begin(), params.half_space_ks.end(),
                                  static_cast<std::int64_t>(k)) != params.half_space_ks.end();
    if (listed) {
      const double target = growth * law[k];
      const Moments mh = moments(h, h2, params.trials);
      const double zh = mh.se > 0 ? (mh.mean - target) / mh.se : (mh.mean == target ? 0.0 : INFINITY);
      report.table.add(static_cast<std::int64_t>(k), "first_coord_positive", target, mh.mean, mh.se,
                       zh);
      worst_half = std::max(worst_half, std::abs(zh));
      half_ok = half_ok && std::abs(zh) <= params.se_mult;
    }
  }
  report.add("E Z_k(all) within " + fmt(params.se_mult) + " SE of lambda^k", total_ok,
             "max |z| = " + fmt(worst_total));
  report.add("E Z_k(half-space) within " + fmt(params.se_mult) + " SE of lambda^k P(X_k in A)",
             half_ok, "max |z| = " + fmt(worst_half));
  return report;
}

SuiteReport verify_azuma(const AzumaParams& params, std::uint64_t seed, unsigned workers) {
  SuiteReport report{"azuma", {}, CsvTable({"K", "k", "trials", "hits", "p_hat", "hits_by_k",
                                            "p_hat_by_k", "bound", "vacuous"})};
  const LatticeParams lattice(params.d, params.R);
  bool at_ok = true, by_ok = true, mean_ok = true;
  double worst_ratio = 0.0, worst_mean_z = 0.0;
  std::uint64_t idx = 0;
  for (double K : params.Ks) {
    const auto rows = rw_box_exit_prob(lattice, params.n, K, params.trials, derive_seed(seed, idx++),
                                       workers);
    for (const auto& r : rows) {
      report.table.add(K, r.k, r.trials, r.hits, r.p_hat, r.hits_by_k, r.p_hat_by_k, r.bound,
                       r.vacuous);
      at_ok = at_ok && r.p_hat <= r.bound;
      by_ok = by_ok && r.p_hat_by_k <= r.bound;
      worst_ratio = std::max(worst_ratio, r.p_hat_by_k / r.bound);
      if (r.se_axis0 > 0) {
        const double z = r.mean_axis0 / r.se_axis0;
        worst_mean_z = std::max(worst_mean_z, std::abs(z));
      }
    }
    const auto& last = rows.back();
    mean_ok = mean_ok && (last.se_axis0 == 0 || std::abs(last.mean_axis0 / last.se_axis0) <= 4.0);
  }
  report.add("P(||X_k|| >= K sqrt n) <= 2d exp(-K^2/2) at every k", at_ok,
             "bound checked for K in {" + [&] {
               std::string s;
               for (double K : params.Ks) s += (s.empty() ? "" : ",") + fmt(K);
               return s;
             }() + "}");
  report.add("running-maximum exit frequency also below the bound", by_ok,
             "max p_hat_by_k / bound = " + fmt(worst_ratio));
  report.add("mean of X_n^1 within 4 SE of 0", mean_ok,
             "max |z| over k = " + fmt(worst_mean_z));
  return report;
}

SuiteReport verify_range_tail(const RangeTailParams& params, std::uint64_t seed, unsigned workers) {
  SuiteReport report{"range-tail", {}, {}};
  const LatticeParams lattice(params.d, params.R);
  const RangeTailReport rt = range_tail(lattice, params.theta, params.n, params.r_grid,
                                        params.trials, seed, workers, params.regime);
  report.table = range_tail_table(rt);
  std::vector<std::pair<double, double>> scaled;
  for (const auto& r : rt.rows) scaled.emplace_back(r.r, r.scaled);
  std::sort(scaled.begin(), scaled.end());
  bool increasing = scaled.size() >= 2;
  for (std::size_t i = 1; i < scaled.size(); ++i) {
    increasing = increasing && scaled[i].second > scaled[i - 1].second;
  }
  std::ostringstream seq;
  for (const auto& [r, s] : scaled) seq << (seq.tellp() > 0 ? ", " : "") << "r=" << fmt(r) << ": " << fmt(s);
  report.add("(r+1)^2 p_hat(r) shows no monotone increase over the grid", !increasing, seq.str());
  report.add("exit indicators nested (nonincreasing in r) in every trial", rt.nested,
             std::to_string(rt.truncated_trials) + " trials hit the population cap");
  return report;
}

SuiteReport verify_gw_bound(const GwBoundParams& params) {
  SuiteReport report{"gw-bound", {}, {}};
  const auto schedule = edge_schedule(params.C, params.N, params.ks);
  const auto rows = survival_bound_check(params.C, schedule, params.slack);
  report.table = gw_table(rows);
  bool ok = true;
  double worst = 0.0;
  for (const auto& r : rows) {
    ok = ok && r.ok;
    worst = std::max(worst, r.k_times_p);
  }
  report.add("k P(X_k > 0) <= (1+slack) 4C/(1-e^-C) at every k", ok,
             "max k P = " + fmt(worst) + ", limit = " + fmt(rows.empty() ? 0.0 : rows.front().limit));
  return report;
}

SuiteReport verify_monotone_coupling(const MonotoneParams& params, std::uint64_t seed,
                                     unsigned workers) {
  SuiteReport report{"monotone-coupling", {}, CsvTable({"instance", "p", "rho0_size",
                                                        "blocked_subset", "union_bound"})};
  const LatticeParams lattice(params.d, params.R);
  const auto n = static_cast<std::size_t>(params.instances);
  std::vector<double> ps(n);
  std::vector<std::int64_t> rho_sizes(n);
  std::vector<std::uint8_t> blocked_ok(n), union_ok(n);
  const int w = params.block_half_width;
  parallel_for(params.instances, workers, [&](std::int64_t i, unsigned) {
    StreamRng rng(seed, static_cast<std::uint64_t>(i), StreamTag::kReplay);
    const double p = params.p_lo + (params.p_hi - params.p_lo) * rng.uniform01();
    std::vector<Site> rho0;
    std::vector<Site> box;
    Site x = Site::origin();
    const int extent = 2 * w + 1;
    std::int64_t cells = 1;
    for (int a = 0; a < params.d; ++a) cells *= extent;
    for (std::int64_t c = 0; c < cells; ++c) {
      std::int64_t rem = c;
      for (int a = 0; a < params.d; ++a) {
        x.c[a] = static_cast<std::int32_t>(rem % extent) - w;
        rem /= extent;
      }
      box.push_back(x);
      if (x == Site::origin()) continue;
      if (rng.uniform01() < params.density) rho0.push_back(x);
    }
    const BondOracle oracle(seed, static_cast<std::uint64_t>(i), p);
    const Site origin = Site::origin();
    blocked_ok[static_cast<std::size_t>(i)] =
        monotone_coupling_check(std::span(&origin, 1), rho0, oracle, lattice, params.horizon);
    // Union bound from three distinct sites of the box.
    std::vector<Site> eta0;
    while (eta0.size() < 3) {
      const Site s = box[rng.below(box.size())];
      if (std::find(eta0.begin(), eta0.end(), s) == eta0.end()) eta0.push_back(s);
    }
    union_ok[static_cast<std::size_t>(i)] = union_bound_check(eta0, oracle, lattice, params.horizon);
    ps[static_cast<std::size_t>(i)] = p;
    rho_sizes[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(rho0.size());
  });
  for (std::size_t i = 0; i < n; ++i) {
    report.table.add(static_cast<std::int64_t>(i), ps[i], rho_sizes[i], blocked_ok[i] != 0,
                     union_ok[i] != 0);
  }
  const auto blocked_fail = std::count(blocked_ok.begin(), blocked_ok.end(), std::uint8_t{0});
  const auto union_fail = std::count(union_ok.begin(), union_ok.end(), std::uint8_t{0});
  report.add("blocked cumulative set within unblocked, every n <= horizon", blocked_fail == 0,
             std::to_string(blocked_fail) + " failing instances of " + std::to_string(n));
  report.add("cumulative set from eta_0 within union of single-site sets", union_fail == 0,
             std::to_string(union_fail) + " failing instances of " + std::to_string(n));
  return report;
}

SuiteReport verify_mean_dip(const MeanDipParams& params, std::uint64_t seed, unsigned workers) {
  SuiteReport report{"mean-dip", {}, {}};
  const LatticeParams lattice(params.d, params.R);
  const MeanEtaCurve curve =
      mean_eta_curve(lattice, params.theta, std::nullopt, params.trials, seed, workers);
  report.table = mean_eta_table(curve);
  std::string detail = "theta = " + fmt(params.theta) + ", seed " + format_seed(seed) + ", ";
  if (curve.dip_k) {
    const auto& m = curve.means[static_cast<std::size_t>(*curve.dip_k)];
    detail += "k = " + std::to_string(*curve.dip_k) + ": mean " + fmt(m.mean) + " + 3 SE = " +
              fmt(m.mean + 3 * m.se);
  } else {
    detail += "no dip";
  }
  report.add("some k <= R^(d-1)+1 has mean |eta_k| + 3 SE < 1",
             curve.dip_k.has_value() && *curve.dip_k <= lattice.scale() + 1, detail);
  return report;
}

SuiteReport verify_scaling(const ScalingParams& params, std::uint64_t seed, unsigned workers) {
  SuiteReport report{"scaling", {}, {}};
  BisectionConfig config = params.bisection;
  config.workers = workers;
  std::vector<CriticalEstimate> all;
  bool floor_ok = true;
  for (const auto& g : params.groups) {
    const auto rows = sweep(g.d, g.ranges, config, std::nullopt, seed, {},
                            [](const CriticalEstimate&) {});
    bool band_ok = true;
    std::string detail;
    for (const auto& e : rows) {
      band_ok = band_ok && e.theta_hat >= g.theta_lo && e.theta_hat <= g.theta_hi;
      floor_ok = floor_ok && e.theta_hat >= params.theta_floor;
      detail += (detail.empty() ? "" : "; ") + std::string("R=") + std::to_string(e.R) +
                ": theta_hat " + fmt(e.theta_hat) + " +- " + fmt(e.bracket_width / 2) +
                (e.budget_exhausted ? " (budget exhausted)" : "");
      all.push_back(e);
    }
    report.add("d=" + std::to_string(g.d) + ": theta_hat in [" + fmt(g.theta_lo) + ", " +
                   fmt(g.theta_hi) + "]",
               band_ok, detail);
    if (g.require_decreasing) {
      bool dec = true;
      std::string lam;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) dec = dec && rows[i].lambda_c_hat < rows[i - 1].lambda_c_hat;
        dec = dec && rows[i].lambda_c_hat > 1.0;
        lam += (lam.empty() ? "" : ", ") + fmt(rows[i].lambda_c_hat);
      }
      report.add("d=" + std::to_string(g.d) + ": lambda_c_hat decreasing in R and above 1", dec,
                 lam);
    }
  }
  report.add("all theta_hat >= " + fmt(params.theta_floor), floor_ok,
             std::to_string(all.size()) + " rows");
  report.table = sweep_table(all);
  return report;
}

const std::vector<std::string_view>& verify_suite_names() {
  static const std::vector<std::string_view> names{
      "coupling", "increment", "mean-measure", "azuma", "range-tail", "gw-bound",
      "monotone-coupling", "equivalence", "mean-dip", "scaling"};
  return names;
}

}  // namespace rangeperc
