// SPDX-License-Identifier: Apache-2.0
//
// CSV renderings of the estimator and check results. Column sets are part
// of the command-line contract.

#pragma once

#include <span>

#include "rangeperc/branching.hpp"
#include "rangeperc/csv.hpp"
#include "rangeperc/estimators.hpp"
#include "rangeperc/gw.hpp"

namespace rangeperc {

/// lambda,trials,survivals,q_hat,ci_lo,ci_hi
CsvTable survival_table(std::span<const SurvivalStats> points);
/// survival columns plus class (sub/super) and ambiguous, in bisection order
CsvTable bisection_table(const CriticalEstimate& est);
/// d,R,lambda_lo,lambda_hi,lambda_c_hat,theta_hat,bracket_width,trials_total,seed
CsvTable sweep_table(std::span<const CriticalEstimate> rows);
/// k,mean,se
CsvTable mean_eta_table(const MeanEtaCurve& curve);
/// k,N,q,mean,survival,k_times_p,bound,limit,ok
CsvTable gw_table(std::span<const SurvivalBoundRow> rows);
/// r_or_k,trials,hits,p_hat,bound,hits_by_k,p_hat_by_k,mean_axis0,se_axis0
CsvTable box_exit_table(std::span<const BoxExitRow> rows);
/// r_or_k,trials,hits,p_hat,bound; bound holds (r+1)^2 p_hat
CsvTable range_tail_table(const RangeTailReport& report);
/// n,mean_outside,se_outside,mean_zeta,mean_a_inside,mean_signed,outside_bound
CsvTable interference_table(const InterferenceSummary& summary);

}  // namespace rangeperc
