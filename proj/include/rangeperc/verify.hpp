// SPDX-License-Identifier: Apache-2.0
//
// Invariant suites. Each returns named pass/fail checks plus a CSV table of
// the underlying numbers; defaults are the sizes used by the acceptance run.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rangeperc/branching.hpp"
#include "rangeperc/csv.hpp"
#include "rangeperc/estimators.hpp"

namespace rangeperc {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  CsvTable table;

  bool pass() const;
  void add(std::string name, bool pass, std::string detail);
};

/// Distinct seed for sub-experiment `index` of a suite.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Compares the recorded shells of an epidemic trial (keep_shells) with the
/// cluster shells of the same oracle: the number of generations compared,
/// or -1 if some shell differs or the two explorations end inconsistently.
std::int64_t compare_shells(const TrialResult& trial, const ClusterResult& cluster);

struct EquivalenceParams {
  std::vector<int> dims{1, 2};
  std::vector<int> ranges{1, 2};
  std::vector<double> ps{0.1, 0.3, 0.6};
  std::int64_t trials = 500;
  std::int64_t mass_cap = 1000;
};
SuiteReport verify_equivalence(const EquivalenceParams& params, std::uint64_t seed, unsigned workers);

struct CouplingParams {
  int d = 2;
  std::vector<int> ranges{1, 2, 4};
  double theta = 1.0;
  std::int64_t trials = 1000;
  std::int64_t horizon = 50;
  std::int64_t population_cap = 100'000;  // BRW total beyond which a trial stops early
};
SuiteReport verify_coupling(const CouplingParams& params, std::uint64_t seed, unsigned workers);

struct IncrementParams {
  int d = 2;
  std::vector<int> ranges{2, 4};
  std::vector<double> thetas{0.5, 1.0};
  std::int64_t states = 50;
  std::int64_t replays = 10'000;
  std::int64_t max_growth = 4;  // frozen states come from 1..max_growth generations
  double z_max = 4.0;
};
SuiteReport verify_increment(const IncrementParams& params, std::uint64_t seed, unsigned workers);

struct MeanMeasureParams {
  int d = 2;
  int R = 2;
  double theta = 1.0;
  std::int64_t trials = 100'000;
  std::int64_t k_max = 10;
  std::vector<std::int64_t> half_space_ks{3, 6};
  double se_mult = 3.0;
};
SuiteReport verify_mean_measure(const MeanMeasureParams& params, std::uint64_t seed,
                                unsigned workers);

/// P(X_k^1 > 0) for the walk with uniform steps on the V displacements, by
/// exact convolution of the first-coordinate step law.
std::vector<double> half_space_law(const LatticeParams& params, std::int64_t k_max);

struct AzumaParams {
  int d = 2;
  int R = 4;
  std::int64_t n = 100;
  std::vector<double> Ks{2.0, 3.0};
  std::int64_t trials = 100'000;
};
SuiteReport verify_azuma(const AzumaParams& params, std::uint64_t seed, unsigned workers);

struct RangeTailParams {
  int d = 2;
  int R = 8;
  double theta = 1.0;
  std::int64_t n = 64;
  std::vector<double> r_grid{1, 2, 4, 8};
  std::int64_t trials = 10'000;
  RangeTailRegime regime{};
};
SuiteReport verify_range_tail(const RangeTailParams& params, std::uint64_t seed, unsigned workers);

struct GwBoundParams {
  double C = 1.0;
  std::int64_t N = 24;
  std::vector<std::int64_t> ks{100, 1000, 10000};
  double slack = 0.05;
};
SuiteReport verify_gw_bound(const GwBoundParams& params);

struct MonotoneParams {
  int d = 2;
  int R = 1;
  std::int64_t instances = 1000;
  std::int64_t horizon = 20;
  int block_half_width = 3;  // rho_0 is drawn from [-w, w]^d minus the origin
  double density = 0.3;
  double p_lo = 0.15;
  double p_hi = 0.6;
};
SuiteReport verify_monotone_coupling(const MonotoneParams& params, std::uint64_t seed,
                                     unsigned workers);

struct MeanDipParams {
  int d = 2;
  int R = 4;
  double theta = 0.05;
  std::int64_t trials = 100'000;
};
SuiteReport verify_mean_dip(const MeanDipParams& params, std::uint64_t seed, unsigned workers);

struct ScalingGroup {
  int d = 2;
  std::vector<int> ranges;
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  bool require_decreasing = false;
};

struct ScalingParams {
  std::vector<ScalingGroup> groups{{2, {4, 8, 16}, 0.6, 2.4, true}, {3, {2, 4}, 0.3, 1.4, false}};
  double theta_floor = 0.2;
  BisectionConfig bisection{};
};
SuiteReport verify_scaling(const ScalingParams& params, std::uint64_t seed, unsigned workers);

/// Suite names accepted by the verify command.
const std::vector<std::string_view>& verify_suite_names();

}  // namespace rangeperc
