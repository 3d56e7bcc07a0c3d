// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include "rangeperc/branching.hpp"
#include "rangeperc/estimators.hpp"
#include "rangeperc/gw.hpp"
#include "rangeperc/manifest.hpp"
#include "rangeperc/parallel.hpp"
#include "rangeperc/tables.hpp"

namespace rangeperc {

namespace fs = std::filesystem;

namespace {

// Keys shared by every command.
constexpr KeySpec kCommon[] = {
    {"seed", "", "master seed, decimal or 0x-hex"},
    {"mode", "bond-exact", "stepping mode: bond-exact or aggregate-fast"},
};

constexpr KeySpec kSimulate[] = {
    {"d", "2", "dimension 1..3"},
    {"R", "1", "range"},
    {"p", "", "bond probability (give exactly one of p, lambda, theta)"},
    {"lambda", "", "mean offspring V(R) p"},
    {"theta", "", "lambda = 1 + theta / R^(d-1)"},
    {"trials", "1", "number of trials"},
    {"first_trial", "0", "index of the first trial"},
    {"gen_cap", "0", "generation cap (0: 10 R^(d-1))"},
    {"mass_cap", "50000", "cumulative-mass cap (0: none)"},
    {"box", "", "box half-width in lattice units; leaving it stops the trial"},
    {"process", "epidemic", "epidemic, brw or coupled"},
    {"trace", "final", "final (one row per trial) or generations (one row per generation)"},
};

constexpr KeySpec kBisection[] = {
    {"theta_max", "8", "top of the bracket in theta units"},
    {"q_floor", "", "absolute survival floor (overrides q_floor_scaled)"},
    {"q_floor_scaled", "1", "survival floor times R^(d-1)"},
    {"theta_tol", "0.05", "final bracket width in theta units"},
    {"trials_per_point", "100", "first look at each bisection point"},
    {"max_trials_per_point", "6400", "trial ceiling per point"},
    {"trial_budget", "400000", "total trials per estimate"},
    {"gen_cap", "0", "generation cap (0: 10 R^(d-1))"},
    {"mass_cap", "0", "cumulative-mass cap (0: 50000)"},
};

constexpr KeySpec kEstimateExtra[] = {
    {"target", "lambda-c", "lambda-c, survival, mean-eta or interference"},
    {"d", "2", "dimension"},
    {"R", "4", "range"},
    {"lambda_list", "", "survival: lambda values"},
    {"trials", "1000", "survival, mean-eta, interference: trials"},
    {"theta", "", "mean-eta, interference: theta"},
    {"k_max", "", "mean-eta: last generation (default R^(d-1)+1)"},
    {"K", "3", "interference: box constant"},
    {"n_max", "", "interference: last generation (default R^(d-1))"},
};

constexpr KeySpec kSweepExtra[] = {
    {"d", "2", "dimension"},
    {"R_list", "4,8,16", "ranges"},
};

constexpr KeySpec kGw[] = {
    {"C", "1", "schedule constant C > 0"},
    {"N", "24", "offspring trials N"},
    {"k_list", "100,1000,10000", "generations"},
    {"slack", "0.05", "relative slack on the bound"},
    {"schedule", "edge", "edge (q = (1 + C/k)/N) or critical (q = 1/N)"},
};

constexpr KeySpec kRangeTail[] = {
    {"d", "2", "dimension"},       {"R", "8", "range"},
    {"theta", "1", "theta > 0"},   {"n", "64", "generations"},
    {"r_grid", "1,2,4,8", "unit-scaled half-widths"},
    {"trials", "10000", "trials"}, {"c", "8", "regime: n <= c R^(d-1)"},
    {"K", "1", "regime: r <= K sqrt(n)"},
    {"population_cap", "5000000", "BRW population cap per trial"},
};

constexpr KeySpec kWalkExit[] = {
    {"d", "2", "dimension"},    {"R", "4", "range"},
    {"n", "100", "steps"},      {"K", "3", "box constant"},
    {"trials", "100000", "walks"},
};

// verify: every suite parameter defaults to the suite's own default.
constexpr KeySpec kVerify[] = {
    {"suite", "", "coupling, increment, mean-measure, azuma, range-tail, gw-bound, "
                  "monotone-coupling, equivalence, mean-dip, scaling"},
    {"d", "", ""},        {"R", "", ""},          {"d_list", "", ""},
    {"R_list", "", ""},   {"p_list", "", ""},     {"theta", "", ""},
    {"theta_list", "", ""}, {"trials", "", ""},   {"horizon", "", ""},
    {"population_cap", "", ""}, {"mass_cap", "", ""}, {"states", "", ""},
    {"replays", "", ""},  {"z_max", "", ""},      {"k_max", "", ""},
    {"k_list", "", ""},   {"se_mult", "", ""},    {"n", "", ""},
    {"K_list", "", ""},   {"r_grid", "", ""},     {"c", "", ""},
    {"K", "", ""},        {"C", "", ""},          {"N", "", ""},
    {"slack", "", ""},    {"instances", "", ""},  {"density", "", ""},
    {"p_lo", "", ""},     {"p_hi", "", ""},       {"trials_per_point", "", ""},
    {"max_trials_per_point", "", ""}, {"trial_budget", "", ""}, {"theta_tol", "", ""},
    {"q_floor_scaled", "", ""}, {"theta_max", "", ""},
};

const std::map<std::string, std::set<std::string>, std::less<>>& suite_keys() {
  static const std::map<std::string, std::set<std::string>, std::less<>> keys{
      {"equivalence", {"d_list", "R_list", "p_list", "trials", "mass_cap"}},
      {"coupling", {"d", "R_list", "theta", "trials", "horizon", "population_cap"}},
      {"increment", {"d", "R_list", "theta_list", "states", "replays", "z_max"}},
      {"mean-measure", {"d", "R", "theta", "trials", "k_max", "k_list", "se_mult"}},
      {"azuma", {"d", "R", "n", "K_list", "trials"}},
      {"range-tail", {"d", "R", "theta", "n", "r_grid", "trials", "c", "K"}},
      {"gw-bound", {"C", "N", "k_list", "slack"}},
      {"monotone-coupling", {"d", "R", "instances", "horizon", "density", "p_lo", "p_hi"}},
      {"mean-dip", {"d", "R", "theta", "trials"}},
      {"scaling", {"trials_per_point", "max_trials_per_point", "trial_budget", "theta_tol",
                   "q_floor_scaled", "theta_max"}},
  };
  return keys;
}

std::vector<KeySpec> join(std::initializer_list<std::span<const KeySpec>> parts) {
  std::vector<KeySpec> out;
  for (auto part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

int to_int(std::int64_t v, std::string_view key) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("key '" + std::string(key) + "' out of range");
  }
  return static_cast<int>(v);
}

std::vector<int> to_ints(const std::vector<std::int64_t>& v, std::string_view key) {
  std::vector<int> out;
  for (auto x : v) out.push_back(to_int(x, key));
  return out;
}

LatticeParams lattice_from(const Config& cfg) {
  try {
    return LatticeParams(to_int(cfg.get_int("d"), "d"), to_int(cfg.get_int("R"), "R"));
  } catch (const LatticeError& e) {
    throw ConfigError(e.what());
  }
}

std::int64_t positive(std::int64_t v, std::string_view key) {
  if (v < 1) throw ConfigError("key '" + std::string(key) + "' must be >= 1");
  return v;
}

std::int64_t nonnegative(std::int64_t v, std::string_view key) {
  if (v < 0) throw ConfigError("key '" + std::string(key) + "' must be >= 0");
  return v;
}

struct Context {
  Config config;
  std::string seed_text;
  std::uint64_t seed = 0;
  StepMode mode = StepMode::kBondExact;
  unsigned workers = 1;
  fs::path out_dir;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

fs::path write_table(const Context& ctx, RunManifest& manifest, const std::string& name,
                     const CsvTable& table) {
  const fs::path path = ctx.out_dir / name;
  write_file_atomic(path, table.str());
  manifest.add_output(path);
  return path;
}

void finish(const Context& ctx, RunManifest& manifest) {
  manifest.extra()["workers"] = ctx.workers;
  manifest.write(ctx.out_dir / "manifest.json");
}

BisectionConfig bisection_from(const Config& cfg, StepMode mode, unsigned workers) {
  BisectionConfig b;
  b.theta_max = cfg.get_double("theta_max");
  b.q_floor = cfg.get_optional_double("q_floor");
  b.q_floor_scaled = cfg.get_double("q_floor_scaled");
  b.theta_tol = cfg.get_double("theta_tol");
  b.trials_per_point = positive(cfg.get_int("trials_per_point"), "trials_per_point");
  b.max_trials_per_point = positive(cfg.get_int("max_trials_per_point"), "max_trials_per_point");
  b.trial_budget = positive(cfg.get_int("trial_budget"), "trial_budget");
  if (!(b.theta_max > 0)) throw ConfigError("key 'theta_max' must be positive");
  if (!(b.theta_tol > 0)) throw ConfigError("key 'theta_tol' must be positive");
  if (!(b.q_floor_scaled > 0)) throw ConfigError("key 'q_floor_scaled' must be positive");
  if (b.q_floor && !(*b.q_floor > 0 && *b.q_floor < 1)) {
    throw ConfigError("key 'q_floor' must lie in (0, 1)");
  }
  if (b.max_trials_per_point < b.trials_per_point) {
    throw ConfigError("max_trials_per_point must be >= trials_per_point");
  }
  b.mode = mode;
  b.workers = workers;
  return b;
}

std::optional<StopRule> stop_override_from(const Config& cfg) {
  StopRule s;
  s.gen_cap = nonnegative(cfg.get_int("gen_cap"), "gen_cap");
  s.mass_cap = nonnegative(cfg.get_int("mass_cap"), "mass_cap");
  return s;
}

nlohmann::json estimate_to_json(const CriticalEstimate& e) {
  return {{"d", e.d},
          {"R", e.R},
          {"lambda_lo", e.lambda_lo},
          {"lambda_hi", e.lambda_hi},
          {"lambda_c_hat", e.lambda_c_hat},
          {"theta_hat", e.theta_hat},
          {"bracket_width", e.bracket_width},
          {"q_floor", e.q_floor},
          {"trials_per_point", e.trials_per_point},
          {"trials_total", e.trials_total},
          {"gen_cap", e.stop.gen_cap},
          {"mass_cap", e.stop.mass_cap},
          {"seed", format_seed(e.seed)},
          {"budget_exhausted", e.budget_exhausted},
          {"top_subcritical", e.top_subcritical}};
}

CriticalEstimate estimate_from_json(const nlohmann::json& j) {
  CriticalEstimate e;
  e.d = j.at("d").get<int>();
  e.R = j.at("R").get<int>();
  e.lambda_lo = j.at("lambda_lo").get<double>();
  e.lambda_hi = j.at("lambda_hi").get<double>();
  e.lambda_c_hat = j.at("lambda_c_hat").get<double>();
  e.theta_hat = j.at("theta_hat").get<double>();
  e.bracket_width = j.at("bracket_width").get<double>();
  e.q_floor = j.at("q_floor").get<double>();
  e.trials_per_point = j.at("trials_per_point").get<std::int64_t>();
  e.trials_total = j.at("trials_total").get<std::int64_t>();
  e.stop.gen_cap = j.at("gen_cap").get<std::int64_t>();
  e.stop.mass_cap = j.at("mass_cap").get<std::int64_t>();
  e.seed = parse_seed(j.at("seed").get<std::string>());
  e.budget_exhausted = j.at("budget_exhausted").get<bool>();
  e.top_subcritical = j.at("top_subcritical").get<bool>();
  return e;
}

void report_estimate(std::ostream& out, const CriticalEstimate& e) {
  out << "d=" << e.d << " R=" << e.R << " lambda_c in [" << format_number(e.lambda_lo) << ", "
      << format_number(e.lambda_hi) << "] theta_hat=" << format_number(e.theta_hat)
      << " trials=" << e.trials_total << (e.budget_exhausted ? " (budget exhausted)" : "")
      << (e.top_subcritical ? " (no supercritical point in bracket)" : "") << "\n";
}

// ---------------------------------------------------------------------------

int cmd_simulate(Context& ctx, bool check_equivalence) {
  const Config& cfg = ctx.config;
  const LatticeParams lattice = lattice_from(cfg);
  const int given = cfg.has("p") + cfg.has("lambda") + cfg.has("theta");
  if (given != 1) throw ConfigError("simulate needs exactly one of p, lambda, theta");
  double p = 0;
  if (cfg.has("p")) p = cfg.get_double("p");
  if (cfg.has("lambda")) p = cfg.get_double("lambda") / static_cast<double>(lattice.volume());
  if (cfg.has("theta")) p = infection_probability(cfg.get_double("theta"), lattice);
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bond probability must lie in [0, 1]");
  const std::int64_t trials = positive(cfg.get_int("trials"), "trials");
  const std::int64_t first = nonnegative(cfg.get_int("first_trial"), "first_trial");
  StopRule stop = StopRule::defaults(lattice);
  if (const auto g = nonnegative(cfg.get_int("gen_cap"), "gen_cap"); g > 0) stop.gen_cap = g;
  stop.mass_cap = nonnegative(cfg.get_int("mass_cap"), "mass_cap");
  if (cfg.has("box")) {
    const double w = cfg.get_double("box");
    if (w < 0) throw ConfigError("key 'box' must be >= 0");
    stop.box = Box(w);
  }
  const std::string& process = cfg.get("process");
  if (process != "epidemic" && process != "brw" && process != "coupled") {
    throw ConfigError("key 'process' must be epidemic, brw or coupled");
  }
  const std::string& trace = cfg.get("trace");
  if (trace != "final" && trace != "generations") {
    throw ConfigError("key 'trace' must be final or generations");
  }
  const bool every_generation = trace == "generations";
  auto first_row = [every_generation](std::size_t size) { return every_generation ? 0 : size - 1; };
  if (check_equivalence && (process != "epidemic" || ctx.mode != StepMode::kBondExact)) {
    throw ConfigError("--check-equivalence needs process=epidemic and mode bond-exact");
  }
  if (process != "epidemic" && lattice.volume() * p < 1.0) {
    throw ConfigError("branching processes need lambda = V(R) p >= 1");
  }

  RunManifest manifest("simulate", cfg.values(), ctx.seed_text, ctx.seed);
  manifest.rows().push_back({{"first_trial", first}, {"trials", trials}, {"seed", format_seed(ctx.seed)}});
  CsvTable table;
  std::int64_t mismatches = 0;
  const Site origin = Site::origin();
  if (process == "epidemic") {
    table = CsvTable({"trial", "n", "eta", "L", "exited_box", "extinct"});
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));
    std::vector<std::uint8_t> bad(static_cast<std::size_t>(trials), 0);
    TrialOptions opts;
    opts.mode = ctx.mode;
    opts.keep_shells = check_equivalence;
    parallel_for(trials, ctx.workers, [&](std::int64_t i, unsigned) {
      const BondOracle oracle(ctx.seed, static_cast<std::uint64_t>(first + i), p);
      auto& r = results[static_cast<std::size_t>(i)];
      r = run_trial(std::span(&origin, 1), {}, oracle, lattice, stop, opts);
      if (check_equivalence) {
        const auto cap = r.cumulative.back() + 1;
        const ClusterResult cluster = percolation_cluster(origin, oracle, lattice, cap);
        bad[static_cast<std::size_t>(i)] = compare_shells(r, cluster) < 0;
        r.shells.clear();
      }
    });
    for (std::int64_t i = 0; i < trials; ++i) {
      const auto& r = results[static_cast<std::size_t>(i)];
      for (std::size_t n = first_row(r.eta_sizes.size()); n < r.eta_sizes.size(); ++n) {
        const bool last = n + 1 == r.eta_sizes.size();
        table.add(first + i, static_cast<std::int64_t>(n), r.eta_sizes[n], r.cumulative[n],
                  last && r.outcome == Outcome::kBoxExit, r.eta_sizes[n] == 0);
      }
    }
    mismatches = std::count(bad.begin(), bad.end(), std::uint8_t{1});
  } else if (process == "brw") {
    table = CsvTable({"trial", "n", "z_total", "z_support", "max_linf", "extinct"});
    std::vector<std::vector<std::array<std::int64_t, 3>>> rows(static_cast<std::size_t>(trials));
    parallel_for(trials, ctx.workers, [&](std::int64_t i, unsigned) {
      StreamRng rng(ctx.seed, static_cast<std::uint64_t>(first + i), StreamTag::kBranching);
      auto pop = BrwPopulation::unit_mass(origin);
      std::int64_t reach = 0;
      std::int64_t mass = 0;
      auto& out = rows[static_cast<std::size_t>(i)];
      for (std::int64_t n = 0;; ++n) {
        for (const auto& [site, c] : pop.counts()) reach = std::max(reach, linf_norm(site));
        mass += pop.total();
        out.push_back({pop.total(), static_cast<std::int64_t>(pop.counts().size()), reach});
        if (pop.empty() || n >= stop.gen_cap || (stop.mass_cap > 0 && mass > stop.mass_cap)) break;
        pop = brw_step(pop, rng, lattice, p);
      }
    });
    for (std::int64_t i = 0; i < trials; ++i) {
      const auto& out = rows[static_cast<std::size_t>(i)];
      for (std::size_t n = first_row(out.size()); n < out.size(); ++n) {
        table.add(first + i, static_cast<std::int64_t>(n), out[n][0], out[n][1], out[n][2],
                  out[n][0] == 0);
      }
    }
  } else {
    table = CsvTable({"trial", "n", "eta", "L", "z_total", "violations"});
    std::vector<std::vector<std::array<std::int64_t, 4>>> rows(static_cast<std::size_t>(trials));
    parallel_for(trials, ctx.workers, [&](std::int64_t i, unsigned) {
      const auto t = static_cast<std::uint64_t>(first + i);
      const BondOracle oracle(ctx.seed, t, p);
      StreamRng rng(ctx.seed, t, StreamTag::kCoupledFill);
      CoupledState cs = CoupledState::initial();
      auto& out = rows[static_cast<std::size_t>(i)];
      for (std::int64_t n = 0;; ++n) {
        out.push_back({static_cast<std::int64_t>(cs.epidemic.infected().size()),
                       cs.epidemic.cumulative(), cs.brw.total(), coupling_violations(cs)});
        if (cs.brw.empty() || n >= stop.gen_cap ||
            (stop.mass_cap > 0 && cs.brw.total() > stop.mass_cap)) {
          break;
        }
        coupled_step(cs, oracle, rng, lattice);
      }
    });
    for (std::int64_t i = 0; i < trials; ++i) {
      const auto& out = rows[static_cast<std::size_t>(i)];
      for (std::size_t n = 0; n < out.size(); ++n) mismatches += out[n][3];
      for (std::size_t n = first_row(out.size()); n < out.size(); ++n) {
        table.add(first + i, static_cast<std::int64_t>(n), out[n][0], out[n][1], out[n][2],
                  out[n][3]);
      }
    }
  }
  write_table(ctx, manifest, "trace.csv", table);
  manifest.extra()["mode"] = std::string(to_string(ctx.mode));
  if (check_equivalence || process == "coupled") manifest.extra()["failures"] = mismatches;
  finish(ctx, manifest);
  *ctx.out << "wrote " << (ctx.out_dir / "trace.csv").string() << " (" << table.size()
           << " rows)\n";
  if (mismatches > 0) {
    *ctx.err << (process == "coupled" ? "coupling violations: " : "equivalence mismatches: ")
             << mismatches << "\n";
    return kExitCheckFailed;
  }
  if (check_equivalence) *ctx.out << "equivalence: all shells match\n";
  return kExitOk;
}

SuiteReport run_suite(const Context& ctx) {
  const Config& cfg = ctx.config;
  const std::string& suite = cfg.get("suite");
  const auto it = suite_keys().find(suite);
  if (it == suite_keys().end()) throw ConfigError("unknown suite '" + suite + "'");
  for (const auto& [key, value] : cfg.values()) {
    if (value.empty() || key == "suite" || key == "seed" || key == "mode") continue;
    if (!it->second.contains(key)) {
      throw ConfigError("key '" + key + "' does not apply to suite " + suite);
    }
  }
  auto int_or = [&](std::string_view key, auto& field) {
    if (cfg.has(key)) field = static_cast<std::remove_reference_t<decltype(field)>>(cfg.get_int(key));
  };
  auto dbl_or = [&](std::string_view key, double& field) {
    if (cfg.has(key)) field = cfg.get_double(key);
  };
  auto ints_or = [&](std::string_view key, std::vector<int>& field) {
    if (cfg.has(key)) field = to_ints(cfg.get_int_list(key), key);
  };
  auto i64s_or = [&](std::string_view key, std::vector<std::int64_t>& field) {
    if (cfg.has(key)) field = cfg.get_int_list(key);
  };
  auto dbls_or = [&](std::string_view key, std::vector<double>& field) {
    if (cfg.has(key)) field = cfg.get_double_list(key);
  };
  const unsigned w = ctx.workers;
  const std::uint64_t seed = ctx.seed;
  try {
    if (suite == "equivalence") {
      EquivalenceParams p;
      ints_or("d_list", p.dims);
      ints_or("R_list", p.ranges);
      dbls_or("p_list", p.ps);
      int_or("trials", p.trials);
      int_or("mass_cap", p.mass_cap);
      positive(p.trials, "trials");
      positive(p.mass_cap, "mass_cap");
      return verify_equivalence(p, seed, w);
    }
    if (suite == "coupling") {
      CouplingParams p;
      int_or("d", p.d);
      ints_or("R_list", p.ranges);
      dbl_or("theta", p.theta);
      int_or("trials", p.trials);
      int_or("horizon", p.horizon);
      int_or("population_cap", p.population_cap);
      positive(p.trials, "trials");
      return verify_coupling(p, seed, w);
    }
    if (suite == "increment") {
      IncrementParams p;
      int_or("d", p.d);
      ints_or("R_list", p.ranges);
      dbls_or("theta_list", p.thetas);
      int_or("states", p.states);
      int_or("replays", p.replays);
      dbl_or("z_max", p.z_max);
      positive(p.replays, "replays");
      return verify_increment(p, seed, w);
    }
    if (suite == "mean-measure") {
      MeanMeasureParams p;
      int_or("d", p.d);
      int_or("R", p.R);
      dbl_or("theta", p.theta);
      int_or("trials", p.trials);
      int_or("k_max", p.k_max);
      i64s_or("k_list", p.half_space_ks);
      dbl_or("se_mult", p.se_mult);
      positive(p.trials, "trials");
      nonnegative(p.k_max, "k_max");
      return verify_mean_measure(p, seed, w);
    }
    if (suite == "azuma") {
      AzumaParams p;
      int_or("d", p.d);
      int_or("R", p.R);
      int_or("n", p.n);
      dbls_or("K_list", p.Ks);
      int_or("trials", p.trials);
      return verify_azuma(p, seed, w);
    }
    if (suite == "range-tail") {
      RangeTailParams p;
      int_or("d", p.d);
      int_or("R", p.R);
      dbl_or("theta", p.theta);
      int_or("n", p.n);
      dbls_or("r_grid", p.r_grid);
      int_or("trials", p.trials);
      dbl_or("c", p.regime.c);
      dbl_or("K", p.regime.K);
      return verify_range_tail(p, seed, w);
    }
    if (suite == "gw-bound") {
      GwBoundParams p;
      dbl_or("C", p.C);
      int_or("N", p.N);
      i64s_or("k_list", p.ks);
      dbl_or("slack", p.slack);
      return verify_gw_bound(p);
    }
    if (suite == "monotone-coupling") {
      MonotoneParams p;
      int_or("d", p.d);
      int_or("R", p.R);
      int_or("instances", p.instances);
      int_or("horizon", p.horizon);
      dbl_or("density", p.density);
      dbl_or("p_lo", p.p_lo);
      dbl_or("p_hi", p.p_hi);
      positive(p.instances, "instances");
      if (!(0 <= p.p_lo && p.p_lo <= p.p_hi && p.p_hi <= 1)) {
        throw ConfigError("need 0 <= p_lo <= p_hi <= 1");
      }
      return verify_monotone_coupling(p, seed, w);
    }
    if (suite == "mean-dip") {
      MeanDipParams p;
      int_or("d", p.d);
      int_or("R", p.R);
      dbl_or("theta", p.theta);
      int_or("trials", p.trials);
      return verify_mean_dip(p, seed, w);
    }
    ScalingParams p;
    int_or("trials_per_point", p.bisection.trials_per_point);
    int_or("max_trials_per_point", p.bisection.max_trials_per_point);
    int_or("trial_budget", p.bisection.trial_budget);
    dbl_or("theta_tol", p.bisection.theta_tol);
    dbl_or("q_floor_scaled", p.bisection.q_floor_scaled);
    dbl_or("theta_max", p.bisection.theta_max);
    p.bisection.mode = ctx.mode;
    return verify_scaling(p, seed, w);
  } catch (const LatticeError& e) {
    throw ConfigError(e.what());
  } catch (const GwError& e) {
    throw ConfigError(e.what());
  }
}

int cmd_verify(Context& ctx) {
  if (!ctx.config.has("suite")) throw ConfigError("verify needs suite=NAME (see --help)");
  const SuiteReport report = run_suite(ctx);
  RunManifest manifest("verify", ctx.config.values(), ctx.seed_text, ctx.seed);
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks) {
    *ctx.out << (c.pass ? "PASS " : "FAIL ") << report.suite << ": " << c.name << " [" << c.detail
             << "]\n";
    checks.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  manifest.extra()["checks"] = checks;
  write_table(ctx, manifest, "verify_" + report.suite + ".csv", report.table);
  finish(ctx, manifest);
  return report.pass() ? kExitOk : kExitCheckFailed;
}

int cmd_estimate(Context& ctx) {
  const Config& cfg = ctx.config;
  const LatticeParams lattice = lattice_from(cfg);
  const std::string& target = cfg.get("target");
  RunManifest manifest("estimate", cfg.values(), ctx.seed_text, ctx.seed);
  const std::uint64_t seed = row_seed(ctx.seed, lattice.dim(), lattice.range());
  manifest.rows().push_back({{"d", lattice.dim()}, {"R", lattice.range()}, {"seed", format_seed(seed)}});
  int code = kExitOk;
  if (target == "lambda-c") {
    const BisectionConfig b = bisection_from(cfg, ctx.mode, ctx.workers);
    const StopRule stop = stop_for(lattice, stop_override_from(cfg));
    CriticalEstimate est;
    try {
      est = estimate_lambda_c(lattice, b, stop, seed);
    } catch (const EstimatorError& e) {
      *ctx.err << "estimate failed: " << e.what() << "\n";
      return kExitCheckFailed;
    }
    manifest.rows()[0] = estimate_to_json(est);
    write_table(ctx, manifest, "estimate.csv", sweep_table(std::span(&est, 1)));
    write_table(ctx, manifest, "bisection.csv", bisection_table(est));
    report_estimate(*ctx.out, est);
    if (!est.theta_positive()) {
      *ctx.err << "theta_hat <= 0: inconsistent with a positive lower bound\n";
      code = kExitCheckFailed;
    }
  } else if (target == "survival") {
    const auto lambdas = cfg.get_double_list("lambda_list");
    if (lambdas.empty()) throw ConfigError("target=survival needs lambda_list");
    const std::int64_t trials = positive(cfg.get_int("trials"), "trials");
    const StopRule stop = stop_for(lattice, stop_override_from(cfg));
    std::vector<SurvivalStats> points;
    SurvivalOptions opts;
    opts.mode = ctx.mode;
    opts.workers = ctx.workers;
    for (double lambda : lambdas) {
      if (!(lambda > 0) || lambda > static_cast<double>(lattice.volume())) {
        throw ConfigError("lambda " + format_number(lambda) + " outside (0, V(R)]");
      }
      points.push_back(estimate_survival(lattice, lambda, stop, trials, seed, opts));
    }
    write_table(ctx, manifest, "survival.csv", survival_table(points));
    for (const auto& s : points) {
      *ctx.out << "lambda=" << format_number(s.lambda) << " q_hat=" << format_number(s.q_hat)
               << " [" << format_number(s.ci_lo) << ", " << format_number(s.ci_hi) << "]\n";
    }
  } else if (target == "mean-eta") {
    if (!cfg.has("theta")) throw ConfigError("target=mean-eta needs theta");
    const double theta = cfg.get_double("theta");
    if (!(theta > 0 && theta <= 1)) throw ConfigError("theta must lie in (0, 1] (lambda >= 1)");
    std::optional<std::int64_t> k_max;
    if (cfg.has("k_max")) k_max = nonnegative(cfg.get_int("k_max"), "k_max");
    const auto curve = mean_eta_curve(lattice, theta, k_max, positive(cfg.get_int("trials"), "trials"),
                                      seed, ctx.workers);
    write_table(ctx, manifest, "mean_eta.csv", mean_eta_table(curve));
    *ctx.out << "dip_k=" << (curve.dip_k ? std::to_string(*curve.dip_k) : "none") << "\n";
  } else if (target == "interference") {
    if (!cfg.has("theta")) throw ConfigError("target=interference needs theta");
    const double theta = cfg.get_double("theta");
    if (!(theta > 0 && theta <= 1)) throw ConfigError("theta must lie in (0, 1]");
    const std::int64_t n_max =
        cfg.has("n_max") ? nonnegative(cfg.get_int("n_max"), "n_max") : lattice.scale();
    const double K = cfg.get_double("K");
    if (!(K > 0)) throw ConfigError("key 'K' must be positive");
    const auto summary = interference_study(lattice, theta, K, n_max,
                                            positive(cfg.get_int("trials"), "trials"), seed,
                                            ctx.workers);
    write_table(ctx, manifest, "interference.csv", interference_table(summary));
    *ctx.out << "tau-symmetry failures: " << summary.tau_bound_failures
             << ", partition failures: " << summary.partition_failures << "\n";
    if (summary.tau_bound_failures + summary.partition_failures > 0) code = kExitCheckFailed;
  } else {
    throw ConfigError("key 'target' must be lambda-c, survival, mean-eta or interference");
  }
  manifest.extra()["mode"] = std::string(to_string(ctx.mode));
  finish(ctx, manifest);
  return code;
}

int cmd_sweep(Context& ctx) {
  const Config& cfg = ctx.config;
  const int d = to_int(cfg.get_int("d"), "d");
  const std::vector<int> ranges = to_ints(cfg.get_int_list("R_list"), "R_list");
  if (ranges.empty()) throw ConfigError("R_list must not be empty");
  for (int R : ranges) {
    try {
      LatticeParams(d, R);
    } catch (const LatticeError& e) {
      throw ConfigError(e.what());
    }
  }
  const BisectionConfig b = bisection_from(cfg, ctx.mode, ctx.workers);
  const auto stop = stop_override_from(cfg);

  const fs::path manifest_path = ctx.out_dir / "manifest.json";
  std::vector<CriticalEstimate> completed;
  if (auto old = load_manifest(manifest_path)) {
    nlohmann::json cfg_json = nlohmann::json::object();
    for (const auto& [k, v] : cfg.values()) cfg_json[k] = v;
    if (old->value("command", "") != "sweep" || old->value("config", nlohmann::json()) != cfg_json ||
        old->value("master_seed_hex", "") != format_seed(ctx.seed)) {
      throw ConfigError("existing manifest in " + ctx.out_dir.string() +
                        " belongs to a different run; choose another --out");
    }
    for (const auto& row : old->at("rows")) completed.push_back(estimate_from_json(row));
    if (!completed.empty()) {
      *ctx.out << "resuming: " << completed.size() << " completed row(s) in manifest\n";
    }
  }

  RunManifest manifest("sweep", cfg.values(), ctx.seed_text, ctx.seed);
  for (const auto& e : completed) manifest.rows().push_back(estimate_to_json(e));
  manifest.extra()["mode"] = std::string(to_string(ctx.mode));
  manifest.extra()["workers"] = ctx.workers;
  std::vector<CriticalEstimate> rows;
  try {
    rows = sweep(d, ranges, b, stop, ctx.seed, completed, [&](const CriticalEstimate& e) {
      report_estimate(*ctx.out, e);
      manifest.rows().push_back(estimate_to_json(e));
      manifest.set_complete(false);
      manifest.write(manifest_path);
    });
  } catch (const EstimatorError& e) {
    *ctx.err << "sweep failed: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  // Row order follows R_list, whichever rows were reused.
  manifest.rows() = nlohmann::json::array();
  for (const auto& e : rows) manifest.rows().push_back(estimate_to_json(e));
  manifest.set_complete(true);
  write_table(ctx, manifest, "sweep.csv", sweep_table(rows));
  finish(ctx, manifest);
  const bool positive_all =
      std::all_of(rows.begin(), rows.end(), [](const CriticalEstimate& e) { return e.theta_positive(); });
  if (!positive_all) {
    *ctx.err << "some theta_hat <= 0: inconsistent with a positive lower bound\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_gw(Context& ctx) {
  const Config& cfg = ctx.config;
  const double C = cfg.get_double("C");
  const std::int64_t N = positive(cfg.get_int("N"), "N");
  const auto ks = cfg.get_int_list("k_list");
  if (ks.empty()) throw ConfigError("k_list must not be empty");
  const double slack = cfg.get_double("slack");
  std::vector<GwScheduleEntry> schedule;
  const std::string& kind = cfg.get("schedule");
  std::vector<SurvivalBoundRow> rows;
  try {
    if (kind == "edge") {
      schedule = edge_schedule(C, N, ks);
    } else if (kind == "critical") {
      for (auto k : ks) schedule.push_back({k, N, 1.0 / static_cast<double>(N)});
    } else {
      throw ConfigError("key 'schedule' must be edge or critical");
    }
    rows = survival_bound_check(C, schedule, slack);
  } catch (const GwError& e) {
    throw ConfigError(e.what());
  }
  RunManifest manifest("gw", cfg.values(), ctx.seed_text, ctx.seed);
  write_table(ctx, manifest, "gw.csv", gw_table(rows));
  finish(ctx, manifest);
  bool ok = true;
  for (const auto& r : rows) {
    *ctx.out << "k=" << r.k << " kP=" << format_number(r.k_times_p) << " limit="
             << format_number(r.limit) << (r.ok ? "" : "  EXCEEDED") << "\n";
    ok = ok && r.ok;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_range_tail(Context& ctx) {
  const Config& cfg = ctx.config;
  const LatticeParams lattice = lattice_from(cfg);
  RangeTailRegime regime{cfg.get_double("c"), cfg.get_double("K")};
  RangeTailReport rep;
  try {
    rep = range_tail(lattice, cfg.get_double("theta"), positive(cfg.get_int("n"), "n"),
                     cfg.get_double_list("r_grid"), positive(cfg.get_int("trials"), "trials"),
                     ctx.seed, ctx.workers, regime,
                     positive(cfg.get_int("population_cap"), "population_cap"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  RunManifest manifest("range-tail", cfg.values(), ctx.seed_text, ctx.seed);
  write_table(ctx, manifest, "range_tail.csv", range_tail_table(rep));
  manifest.extra()["nested"] = rep.nested;
  manifest.extra()["truncated_trials"] = rep.truncated_trials;
  finish(ctx, manifest);
  for (const auto& r : rep.rows) {
    *ctx.out << "r=" << format_number(r.r) << " p_hat=" << format_number(r.p_hat)
             << " (r+1)^2 p_hat=" << format_number(r.scaled) << "\n";
  }
  return rep.nested ? kExitOk : kExitCheckFailed;
}

int cmd_walk_exit(Context& ctx) {
  const Config& cfg = ctx.config;
  const LatticeParams lattice = lattice_from(cfg);
  std::vector<BoxExitRow> rows;
  try {
    rows = rw_box_exit_prob(lattice, positive(cfg.get_int("n"), "n"), cfg.get_double("K"),
                            positive(cfg.get_int("trials"), "trials"), ctx.seed, ctx.workers);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  RunManifest manifest("walk-exit", cfg.values(), ctx.seed_text, ctx.seed);
  write_table(ctx, manifest, "walk_exit.csv", box_exit_table(rows));
  finish(ctx, manifest);
  bool ok = true;
  double worst = 0.0;
  for (const auto& r : rows) {
    ok = ok && r.p_hat <= r.bound;
    worst = std::max(worst, r.p_hat);
  }
  *ctx.out << "max p_hat=" << format_number(worst) << " bound=" << format_number(rows.front().bound)
           << (rows.front().vacuous ? " (vacuous)" : "") << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "verify", "estimate", "sweep",
                                              "gw", "range-tail", "walk-exit"};
  return names;
}

std::vector<KeySpec> command_schema(const std::string& command) {
  if (command == "simulate") return join({kCommon, kSimulate});
  if (command == "verify") return join({kCommon, kVerify});
  if (command == "estimate") return join({kCommon, kEstimateExtra, kBisection});
  if (command == "sweep") return join({kCommon, kSweepExtra, kBisection});
  if (command == "gw") return join({kCommon, kGw});
  if (command == "range-tail") return join({kCommon, kRangeTail});
  if (command == "walk-exit") return join({kCommon, kWalkExit});
  throw ConfigError("unknown command '" + command + "'");
}

std::string resolve_seed_text(const std::optional<std::string>& flag, const Config& config) {
  if (flag) return *flag;
  if (config.has("seed")) return config.get("seed");
  if (const char* env = std::getenv("RANGEPERC_SEED"); env != nullptr && *env != '\0') return env;
  return kDefaultSeed;
}

int run_command(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;
  try {
    const auto schema = command_schema(options.command);
    ctx.config = options.config_path ? Config::from_file(*options.config_path) : Config{};
    for (const auto& o : options.overrides) ctx.config.apply_override(o);
    if (options.mode) ctx.config.set("mode", *options.mode);
    ctx.config.resolve(schema);
    ctx.seed_text = resolve_seed_text(options.seed_text, ctx.config);
    ctx.seed = parse_seed(ctx.seed_text);
    ctx.config.set("seed", ctx.seed_text);
    try {
      ctx.mode = parse_step_mode(ctx.config.get("mode"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    ctx.workers = options.workers.value_or(default_workers());
    if (ctx.workers == 0) throw ConfigError("--workers must be >= 1");
    if (options.check_equivalence && options.command != "simulate") {
      throw ConfigError("--check-equivalence applies to simulate only");
    }
    ctx.out_dir = options.out_dir;
    fs::create_directories(ctx.out_dir);

    if (options.command == "simulate") return cmd_simulate(ctx, options.check_equivalence);
    if (options.command == "verify") return cmd_verify(ctx);
    if (options.command == "estimate") return cmd_estimate(ctx);
    if (options.command == "sweep") return cmd_sweep(ctx);
    if (options.command == "gw") return cmd_gw(ctx);
    if (options.command == "range-tail") return cmd_range_tail(ctx);
    return cmd_walk_exit(ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EstimatorError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace rangeperc
