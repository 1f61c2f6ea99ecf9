#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "beliefnet/acquisition.hpp"
#include "beliefnet/common.hpp"
#include "beliefnet/network.hpp"

namespace beliefnet {

using Rng = std::mt19937_64;

/// All agents' Gaussian beliefs at one time step.
struct BeliefState {
    int t = 0;
    Eigen::VectorXd pi;      // belief means
    Eigen::VectorXd sigma2;  // belief variances
};

/// Signals published by all agents at one time step.
struct SignalVector {
    int t = 0;
    Eigen::VectorXd s;
};

/// Gaussian approximation of each agent's combined neighbor signal,
/// plus the resulting update weight.
struct SocialSignal {
    Eigen::VectorXd eta;       // weighted neighbor signal means
    Eigen::VectorXd sigma2_y;  // weighted neighbor signal variances
    Eigen::VectorXd alpha;     // update weights, in [0, 1]
};

/// eta[i] = sum_j w_ij s[j], sigma2_y[i] = sum_j w_ij^2 sigma2[j], and the
/// precision-weighted alpha. A frozen agent (own variance 0) gets alpha 0.
SocialSignal combine_social_signal(const Network& net, const SignalVector& signals,
                                   const BeliefState& state);

struct UpdateResult {
    double pi;
    double sigma2;
    double alpha;
};

/// Conjugate Gaussian update of one agent's belief against its social
/// signal: posterior mean alpha*eta + (1-alpha)*pi, posterior variance
/// sigma2*sigma2_y/(sigma2+sigma2_y) (precisions add). A zero own
/// variance freezes the belief; a zero social variance adopts it exactly.
UpdateResult bayesian_update(double pi, double sigma2, double eta, double sigma2_y);

/// Draws s[i] ~ N(pi[i], sigma2[i]) independently across agents.
/// A zero-variance belief publishes its mean exactly.
SignalVector draw_signals(const BeliefState& state, Rng& rng);

/// One synchronous round: combine social signals, update every agent.
BeliefState step(const Network& net, const BeliefState& state, const SignalVector& signals);

/// Deterministic per-step variance/weight schedule. Belief variances never
/// depend on realized signals, so the whole schedule is known up front.
/// Row t holds sigma2_t, sigma2_y_t, alpha_t; `steps` is the last recorded
/// step (the horizon, or earlier once max_i sigma2_{i,t} < tol).
struct VarianceSchedule {
    Eigen::MatrixXd sigma2;
    Eigen::MatrixXd sigma2_y;
    Eigen::MatrixXd alpha;
    int steps = 0;
};

VarianceSchedule variance_schedule(const Network& net, const Eigen::VectorXd& sigma2_0,
                                   int horizon, std::optional<double> tol = {});

namespace series {
constexpr unsigned signals = 1;
constexpr unsigned means = 2;
constexpr unsigned variances = 4;
constexpr unsigned all = signals | means | variances;
}  // namespace series

struct SimConfig {
    double theta = 0.0;
    int horizon = 1;           // max steps T; step 0 is always recorded
    std::int64_t replicates = 1;
    std::uint64_t seed = 0;
    unsigned record = 0;       // series bitmask; full trajectories kept only for set members
    std::optional<double> convergence_tol;  // early stop on max_i sigma2_{i,t}
    std::vector<int> histogram_steps;       // per-agent signal histograms at these t
};

/// 3-sigma band endpoints per (step, agent); when handed to
/// simulate_ensemble, in-band draws are counted during the run.
struct Bands {
    Eigen::MatrixXd lo;
    Eigen::MatrixXd hi;
};

constexpr double kHistogramBinWidth = 0.01;

/// Monte-Carlo summary over replicates. Moments are always accumulated
/// (one-pass, per step and agent); trajectories only for recorded series.
struct Ensemble {
    int n = 0;
    int steps = 0;               // recorded t = 0..steps
    std::int64_t replicates = 0;
    SimConfig config;

    Eigen::MatrixXd mean_s, var_s;    // (steps+1) x n, variance with n-1 denominator
    Eigen::MatrixXd mean_pi, var_pi;
    Eigen::MatrixXd sigma2;           // deterministic belief-variance schedule

    bool has_coverage = false;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> in_band;

    // (t, agent) -> histogram of signals, keyed by floor(s / bin width)
    std::map<std::pair<int, int>, std::map<long, long>> histograms;

    // per-replicate trajectories, present only for recorded series
    std::vector<Eigen::MatrixXd> traj_signals, traj_means, traj_variances;
};

/// Runs `cfg.replicates` seeded replicates of the belief dynamics from
/// pi_0 = theta * 1 and the given initial variances. Each replicate draws
/// from its own stream_seed(cfg.seed, replicate) stream and replicates are
/// partitioned into fixed chunks merged in index order, so the result is a
/// pure function of the inputs regardless of `workers`.
Ensemble simulate_ensemble(const Network& net, const InitialBeliefs& init, const SimConfig& cfg,
                           int workers = 1, const Bands* coverage_bands = nullptr);

}  // namespace beliefnet
