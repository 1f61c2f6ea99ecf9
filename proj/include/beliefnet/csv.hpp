#pragma once

#include <string>
#include <vector>

#include "beliefnet/analytics.hpp"
#include "beliefnet/dynamics.hpp"
#include "beliefnet/estimation.hpp"

namespace beliefnet {

/// All writers emit UTF-8 with LF line endings, doubles at 17 significant
/// digits, a mandatory header row, and one leading `#` pragma line naming
/// the file kind and the run it came from (n, horizon, replicates, theta,
/// seed as applicable). Readers require the pragma, reject unknown
/// headers, and fail on duplicate or missing grid cells.

/// Columns `t,agent,mean_s,var_s,mean_pi,var_pi,sigma2`.
void write_moment_csv(const std::string& path, const Ensemble& ensemble);

/// Rebuilds the moment summary; trajectories, histograms and coverage
/// counts are not part of this file (coverage lives in its sidecar).
Ensemble read_moment_csv(const std::string& path);

/// Columns `t,agent,mean,var_exact,var_eq8,sigma2,band_lo,band_hi`;
/// the mean column is constant at theta.
void write_analytic_csv(const std::string& path, const MomentTrajectory& traj);

MomentTrajectory read_analytic_csv(const std::string& path);

/// Sidecar with in-band draw counts, columns `t,agent,inside,total`.
/// Requires a coverage-tracking run.
void write_coverage_csv(const std::string& path, const Ensemble& ensemble);

/// Merges coverage counts into an ensemble read from the matching moment
/// CSV. ProvenanceMismatch if the sidecar came from a different run.
void read_coverage_csv(const std::string& path, Ensemble& ensemble);

/// Columns `replicate,t,agent,signal,mean,variance`. Requires all three
/// series recorded.
void write_trajectory_csv(const std::string& path, const Ensemble& ensemble);

/// Columns `t,agent,bin_lo,count`, fixed bin width; one row per occupied
/// bin at each requested (step, agent).
void write_histogram_csv(const std::string& path, const Ensemble& ensemble);

/// Columns `cost,variance,count`, header mandatory, `#` comments allowed.
std::vector<CostObservation> read_cost_csv(const std::string& path);

/// Columns `reward,variance`, header mandatory, `#` comments allowed.
std::vector<RewardObservation> read_reward_csv(const std::string& path);

}  // namespace beliefnet
