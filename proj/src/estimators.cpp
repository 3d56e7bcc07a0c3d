// SPDX-License-Identifier: Apache-2.0

#include "rangeperc/estimators.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "rangeperc/parallel.hpp"
#include "rangeperc/rng.hpp"
#include "rangeperc/stats.hpp"

namespace rangeperc {

namespace {

unsigned resolve_workers(unsigned workers) { return workers == 0 ? default_workers() : workers; }

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw EstimatorError("integer accumulator overflow");
  return out;
}

std::int64_t checked_square(std::int64_t a) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, a, &out)) throw EstimatorError("integer accumulator overflow");
  return out;
}

// Mean and standard error from exact integer sums, so the result does not
// depend on how trials were split across workers.
std::pair<double, double> mean_se(std::int64_t sum, std::int64_t sum_sq, std::int64_t n) {
  const double dn = static_cast<double>(n);
  const double mean = static_cast<double>(sum) / dn;
  if (n < 2) return {mean, 0.0};
  const double var = std::max(0.0, (static_cast<double>(sum_sq) - dn * mean * mean) / (dn - 1.0));
  return {mean, std::sqrt(var / dn)};
}

}  // namespace

SurvivalStats make_survival_stats(double lambda, std::int64_t trials, std::int64_t survivals) {
  SurvivalStats s;
  s.lambda = lambda;
  s.trials = trials;
  s.survivals = survivals;
  s.q_hat = static_cast<double>(survivals) / static_cast<double>(trials);
  const Interval ci = wilson_interval(survivals, trials);
  s.ci_lo = ci.lo;
  s.ci_hi = ci.hi;
  return s;
}

std::vector<std::uint8_t> survival_flags(const LatticeParams& params, double lambda,
                                         const StopRule& stop, std::int64_t first_trial,
                                         std::int64_t count, std::uint64_t seed,
                                         const SurvivalOptions& options) {
  const double V = static_cast<double>(params.volume());
  if (!(lambda > 0.0) || lambda > V) {
    throw EstimatorError("lambda must lie in (0, V(R)] so that p = lambda/V(R) is a probability");
  }
  if (count < 0 || first_trial < 0) throw EstimatorError("trial range must be nonnegative");
  const double p = std::min(1.0, lambda / V);
  const Site origin = Site::origin();
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(count), 0);
  TrialOptions topts;
  topts.mode = options.mode;
  parallel_for(count, resolve_workers(options.workers), [&](std::int64_t i, unsigned) {
    const BondOracle oracle(seed, static_cast<std::uint64_t>(first_trial + i), p);
    const TrialResult r = run_trial(std::span(&origin, 1), {}, oracle, params, stop, topts);
    flags[static_cast<std::size_t>(i)] = r.survived() ? 1 : 0;
  });
  return flags;
}

SurvivalStats estimate_survival(const LatticeParams& params, double lambda, const StopRule& stop,
                                std::int64_t trials, std::uint64_t seed,
                                const SurvivalOptions& options) {
  if (trials < 1) throw EstimatorError("trials must be at least 1");
  const auto flags = survival_flags(params, lambda, stop, options.first_trial, trials, seed, options);
  const std::int64_t survivals = std::count(flags.begin(), flags.end(), std::uint8_t{1});
  return make_survival_stats(lambda, trials, survivals);
}

double BisectionConfig::floor_for(const LatticeParams& params) const {
  if (q_floor) return *q_floor;
  return std::min(0.5, q_floor_scaled / static_cast<double>(params.scale()));
}

namespace {

class Bisector {
 public:
  Bisector(const LatticeParams& params, const BisectionConfig& config, const StopRule& stop,
           std::uint64_t seed, CriticalEstimate& est)
      : params_(params), config_(config), stop_(stop), seed_(seed), est_(est) {}

  BisectionPoint classify(double lambda) {
    const double floor = est_.q_floor;
    SurvivalOptions sopts;
    sopts.mode = config_.mode;
    sopts.workers = config_.workers;
    std::int64_t done = 0;
    std::int64_t survivals = 0;
    std::int64_t target = std::max<std::int64_t>(1, config_.trials_per_point);
    BisectionPoint point;
    for (;;) {
      const std::int64_t left = config_.trial_budget - est_.trials_total;
      if (target - done > left) {
        target = done + std::max<std::int64_t>(0, left);
        est_.budget_exhausted = true;
      }
      if (target > done) {
        sopts.first_trial = done;
        const auto flags =
            survival_flags(params_, lambda, stop_, done, target - done, seed_, sopts);
        survivals += std::count(flags.begin(), flags.end(), std::uint8_t{1});
        est_.trials_total += target - done;
        done = target;
      }
      if (done == 0) throw EstimatorError("trial budget exhausted before any trial ran");
      point.stats = make_survival_stats(lambda, done, survivals);
      if (point.stats.ci_lo > floor) {
        point.cls = PointClass::kSupercritical;
        break;
      }
      if (point.stats.ci_hi < floor) {
        point.cls = PointClass::kSubcritical;
        break;
      }
      if (est_.budget_exhausted || done >= config_.max_trials_per_point) {
        point.ambiguous = true;
        point.cls = point.stats.q_hat >= floor ? PointClass::kSupercritical
                                               : PointClass::kSubcritical;
        break;
      }
      target = std::min(2 * done, std::max(done + 1, config_.max_trials_per_point));
    }
    est_.path.push_back(point);
    return point;
  }

 private:
  const LatticeParams& params_;
  const BisectionConfig& config_;
  const StopRule& stop_;
  std::uint64_t seed_;
  CriticalEstimate& est_;
};

}  // namespace

CriticalEstimate estimate_lambda_c(const LatticeParams& params, const BisectionConfig& config,
                                   const StopRule& stop, std::uint64_t seed) {
  if (!(config.theta_max > 0.0)) throw EstimatorError("theta_max must be positive");
  if (!(config.theta_tol > 0.0)) throw EstimatorError("theta_tol must be positive");
  if (config.trials_per_point < 1 || config.max_trials_per_point < config.trials_per_point) {
    throw EstimatorError("need 1 <= trials_per_point <= max_trials_per_point");
  }
  const double scale = static_cast<double>(params.scale());
  CriticalEstimate est;
  est.d = params.dim();
  est.R = params.range();
  est.q_floor = config.floor_for(params);
  if (!(est.q_floor > 0.0 && est.q_floor < 1.0)) throw EstimatorError("q_floor must lie in (0, 1)");
  est.trials_per_point = config.trials_per_point;
  est.stop = stop;
  est.seed = seed;

  Bisector bisector(params, config, stop, seed, est);
  double lo = 1.0;
  double hi = std::min(1.0 + config.theta_max / scale, static_cast<double>(params.volume()));
  if (bisector.classify(lo).cls == PointClass::kSupercritical) {
    throw EstimatorError(
        "lambda = 1 classifies as supercritical: the stop rule caps are too small for this R");
  }
  const double tol = config.theta_tol / scale;
  bool any_super = false;
  while (hi - lo > tol && !est.budget_exhausted) {
    const double mid = 0.5 * (lo + hi);
    if (bisector.classify(mid).cls == PointClass::kSupercritical) {
      hi = mid;
      any_super = true;
    } else {
      lo = mid;
    }
  }
  if (!any_super && !est.budget_exhausted) {
    est.top_subcritical = bisector.classify(hi).cls == PointClass::kSubcritical;
  }
  est.lambda_lo = lo;
  est.lambda_hi = hi;
  est.lambda_c_hat = 0.5 * (lo + hi);
  est.theta_hat = scale * (est.lambda_c_hat - 1.0);
  est.bracket_width = scale * (hi - lo);
  return est;
}

MeanEtaCurve mean_eta_curve(const LatticeParams& params, double theta,
                            std::optional<std::int64_t> k_max, std::int64_t trials,
                            std::uint64_t seed, unsigned workers) {
  if (!(theta > 0.0)) throw EstimatorError("theta must be positive (lambda >= 1)");
  if (theta > 1.0) throw EstimatorError("theta must be at most 1");
  if (trials < 1) throw EstimatorError("trials must be at least 1");
  MeanEtaCurve curve;
  curve.theta = theta;
  curve.R = params.range();
  curve.k_max = k_max.value_or(params.scale() + 1);
  if (curve.k_max < 0) throw EstimatorError("k_max must be nonnegative");
  curve.trials = trials;
  const double p = infection_probability(theta, params);
  if (p > 1.0) throw EstimatorError("theta gives p > 1");

  const std::size_t K = static_cast<std::size_t>(curve.k_max) + 1;
  const unsigned w = worker_slots(trials, resolve_workers(workers));
  std::vector<std::vector<std::int64_t>> sums(w, std::vector<std::int64_t>(K, 0));
  std::vector<std::vector<std::int64_t>> squares(w, std::vector<std::int64_t>(K, 0));
  StopRule stop;
  stop.gen_cap = curve.k_max;
  stop.mass_cap = std::numeric_limits<std::int64_t>::max();
  const Site origin = Site::origin();
  parallel_for(trials, w, [&](std::int64_t i, unsigned worker) {
    const BondOracle oracle(seed, static_cast<std::uint64_t>(i), p);
    const TrialResult r = run_trial(std::span(&origin, 1), {}, oracle, params, stop);
    for (std::size_t k = 0; k < r.eta_sizes.size() && k < K; ++k) {
      sums[worker][k] = checked_add(sums[worker][k], r.eta_sizes[k]);
      squares[worker][k] = checked_add(squares[worker][k], checked_square(r.eta_sizes[k]));
    }
  });
  for (std::size_t k = 0; k < K; ++k) {
    std::int64_t s = 0, s2 = 0;
    for (unsigned j = 0; j < w; ++j) {
      s = checked_add(s, sums[j][k]);
      s2 = checked_add(s2, squares[j][k]);
    }
    const auto [mean, se] = mean_se(s, s2, trials);
    curve.means.push_back({static_cast<std::int64_t>(k), mean, se});
    if (!curve.dip_k && k > 0 && mean + 3.0 * se < 1.0) curve.dip_k = static_cast<std::int64_t>(k);
  }
  return curve;
}

bool InterferenceReport::tau_bound_holds() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const InterferenceRow& r) { return 2.0 * r.tau_sum >= r.full_sum; });
}

bool InterferenceReport::partition_holds() const {
  return std::all_of(rows.begin(), rows.end(), [](const InterferenceRow& r) {
    return r.rho <= r.outside + r.zeta + r.a_inside + r.a_outside;
  });
}

InterferenceReport interference_report(std::span<const InfectionRecord> records, double theta,
                                       double K, std::int64_t n_max, const LatticeParams& params) {
  if (records.empty()) throw EstimatorError("interference_report needs infection records");
  if (!(K > 0.0)) throw EstimatorError("K must be positive");
  if (n_max < 0) throw EstimatorError("n_max must be nonnegative");
  InterferenceReport report;
  report.K = K;
  report.epsilon = theta / static_cast<double>(params.scale());
  const double V = static_cast<double>(params.volume());
  const double dense = 6.0 * report.epsilon * V;

  absl::flat_hash_map<Site, std::int64_t> tau;
  for (const auto& rec : records) {
    if (rec.tau <= n_max) tau.emplace(rec.site, rec.tau);
  }
  const auto& deltas = params.displacements();
  for (std::int64_t n = 0; n <= n_max; ++n) {
    InterferenceRow row;
    row.n = n;
    const double half = K * std::sqrt(static_cast<double>(n)) * params.range();
    std::int64_t tau_pairs = 0;
    std::int64_t all_pairs = 0;
    for (const auto& rec : records) {
      if (rec.tau > n) continue;
      ++row.rho;
      std::int64_t occupied = 0;
      for (const auto& delta : deltas) {
        const auto it = tau.find(translate(rec.site, delta));
        if (it == tau.end() || it->second > n) continue;
        ++occupied;
        if (it->second <= rec.tau) ++tau_pairs;
      }
      all_pairs += occupied;
      const bool inside = static_cast<double>(linf_norm(rec.site)) <= half;
      const bool in_a = static_cast<double>(occupied) >= dense;
      if (!inside) ++row.outside;
      if (in_a) {
        ++(inside ? row.a_inside : row.a_outside);
      } else if (inside) {
        ++row.zeta;
      }
    }
    row.tau_sum = static_cast<double>(tau_pairs) / V;
    row.full_sum = static_cast<double>(all_pairs) / V;
    row.signed_term = report.epsilon * static_cast<double>(row.outside + row.zeta - 2 * row.a_inside);
    report.rows.push_back(row);
  }
  return report;
}

InterferenceSummary interference_study(const LatticeParams& params, double theta, double K,
                                       std::int64_t n_max, std::int64_t trials,
                                       std::uint64_t seed, unsigned workers) {
  if (trials < 1) throw EstimatorError("trials must be at least 1");
  if (!(theta > 0.0)) throw EstimatorError("theta must be positive");
  const double p = infection_probability(theta, params);
  if (p > 1.0) throw EstimatorError("theta gives p > 1");
  const std::size_t rows = static_cast<std::size_t>(n_max) + 1;
  const unsigned w = worker_slots(trials, resolve_workers(workers));
  struct Acc {
    std::vector<std::int64_t> outside, outside_sq, zeta, a_inside;
    std::int64_t tau_fail = 0, part_fail = 0;
  };
  std::vector<Acc> acc(w);
  for (auto& a : acc) {
    a.outside.assign(rows, 0);
    a.outside_sq.assign(rows, 0);
    a.zeta.assign(rows, 0);
    a.a_inside.assign(rows, 0);
  }
  StopRule stop;
  stop.gen_cap = n_max;
  stop.mass_cap = std::numeric_limits<std::int64_t>::max();
  const Site origin = Site::origin();
  parallel_for(trials, w, [&](std::int64_t i, unsigned worker) {
    const BondOracle oracle(seed, static_cast<std::uint64_t>(i), p);
    EpidemicState state = EpidemicState::initial(std::span(&origin, 1));
    run_trial(state, oracle, params, stop);
    const auto records = state.infection_records();
    const InterferenceReport rep = interference_report(records, theta, K, n_max, params);
    Acc& a = acc[worker];
    for (std::size_t n = 0; n < rows; ++n) {
      const auto& r = rep.rows[n];
      a.outside[n] = checked_add(a.outside[n], r.outside);
      a.outside_sq[n] = checked_add(a.outside_sq[n], checked_square(r.outside));
      a.zeta[n] = checked_add(a.zeta[n], r.zeta);
      a.a_inside[n] = checked_add(a.a_inside[n], r.a_inside);
    }
    if (!rep.tau_bound_holds()) ++a.tau_fail;
    if (!rep.partition_holds()) ++a.part_fail;
  });
  InterferenceSummary summary;
  summary.trials = trials;
  const double eps = theta / static_cast<double>(params.scale());
  const double dt = static_cast<double>(trials);
  for (std::size_t n = 0; n < rows; ++n) {
    std::int64_t out = 0, out_sq = 0, zeta = 0, a_in = 0;
    for (const auto& a : acc) {
      out = checked_add(out, a.outside[n]);
      out_sq = checked_add(out_sq, a.outside_sq[n]);
      zeta = checked_add(zeta, a.zeta[n]);
      a_in = checked_add(a_in, a.a_inside[n]);
    }
    InterferenceSummaryRow row;
    row.n = static_cast<std::int64_t>(n);
    std::tie(row.mean_outside, row.se_outside) = mean_se(out, out_sq, trials);
    row.mean_zeta = static_cast<double>(zeta) / dt;
    row.mean_a_inside = static_cast<double>(a_in) / dt;
    row.mean_signed = eps * (row.mean_outside + row.mean_zeta - 2.0 * row.mean_a_inside);
    row.outside_bound = std::exp(4.0) * 2.0 * params.dim() * static_cast<double>(n) *
                        std::exp(-K * K / 2.0);
    summary.rows.push_back(row);
  }
  for (const auto& a : acc) {
    summary.tau_bound_failures += a.tau_fail;
    summary.partition_failures += a.part_fail;
  }
  return summary;
}

std::uint64_t row_seed(std::uint64_t master_seed, int d, int R) {
  return mix64(mix64(master_seed ^ 0x5851f42d4c957f2dULL) ^
               ((static_cast<std::uint64_t>(d) << 32) | static_cast<std::uint32_t>(R)));
}

StopRule stop_for(const LatticeParams& params, const std::optional<StopRule>& stop_override) {
  StopRule stop = StopRule::defaults(params);
  if (stop_override) {
    if (stop_override->gen_cap > 0) stop.gen_cap = stop_override->gen_cap;
    if (stop_override->mass_cap > 0) stop.mass_cap = stop_override->mass_cap;
    if (stop_override->box) stop.box = stop_override->box;
  }
  return stop;
}

}  // namespace rangeperc
