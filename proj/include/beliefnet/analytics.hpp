#pragma once

#include <optional>

#include <Eigen/Dense>

#include "beliefnet/acquisition.hpp"
#include "beliefnet/common.hpp"
#include "beliefnet/dynamics.hpp"
#include "beliefnet/network.hpp"

namespace beliefnet {

/// Covariance of the belief-mean vector at one step, with the diagonal
/// and the (deterministic) belief variances carried alongside.
struct CovarianceState {
    int t = 0;
    Eigen::MatrixXd P;        // Cov(pi_t, pi_t), symmetric PSD
    Eigen::VectorXd delta2;   // diag(P)
    Eigen::VectorXd sigma2;   // belief variances at t
};

/// Start of the recursion: pi_0 = theta * 1 is deterministic, so P_0 = 0.
CovarianceState initial_covariance(const Eigen::VectorXd& sigma2_0);

/// M = A W + (I - A): the row-stochastic matrix driving the mean dynamics.
Eigen::MatrixXd mixing_matrix(const Eigen::VectorXd& alpha, const Network& net);

/// Exact one-step covariance propagation. The mean recursion is linear,
/// pi_{t+1} = M pi_t + (A W) eps_t with eps_t the zero-mean draw noise
/// (variance diag(sigma2_t), independent of the past), so
/// P_{t+1} = M P M^T + (A W) diag(sigma2_t) (A W)^T exactly.
/// P is re-symmetrized each step; an eigenvalue below -1e-10 is a
/// NumericError, never clamped silently.
CovarianceState propagate_covariance(const CovarianceState& cov, const Network& net,
                                     const Eigen::VectorXd& alpha);

/// Exact signal variance D(s_t) = delta2_t + sigma2_t: the published
/// signal is the wandering belief mean plus independent draw noise.
Eigen::VectorXd signal_variance_exact(const CovarianceState& cov);

/// The closed-form signal-variance expression
///   (I-A)^2 delta2 + A^2 W.^2 (delta2 + sigma2)
///     + 2 A (I-A) diag(W P) + sigma2_next,
/// with all quantities except sigma2_next taken at the previous step.
/// Its middle term applies squared weights to the diagonal of P only,
/// dropping cross-covariances between distinct neighbors' means, so it is
/// an approximation of the exact recursion whenever those have become
/// correlated; the two agree to machine precision at t=1 where P_0 = 0.
/// (The scalar per-agent counterpart of this formula elsewhere carries
/// unsquared weights in the middle term; the squared form is the one
/// consistent with the social-signal variance and is implemented here.)
Eigen::VectorXd signal_variance_eq8(const CovarianceState& cov_prev, const Network& net,
                                    const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& sigma2_next);

/// Closed-form moments of the signal process over a horizon: E(s_t) is
/// theta at every step (mean stationarity), D(s_t) via both the exact
/// recursion and the closed-form expression, and theta +/- 3 sqrt(D)
/// bands from the exact variance.
struct MomentTrajectory {
    double theta = 0.0;
    int steps = 0;
    Eigen::MatrixXd var_exact;  // (steps+1) x n
    Eigen::MatrixXd var_eq8;
    Eigen::MatrixXd sigma2;
    Eigen::MatrixXd band_lo, band_hi;

    Bands bands() const { return {band_lo, band_hi}; }
};

/// `tol` applies the simulator's early-stop rule so both produce the
/// same grid for comparison.
MomentTrajectory analytic_moments(const Network& net, const InitialBeliefs& init, int horizon,
                                  std::optional<double> tol = {});

/// Per-cell agreement between a Monte-Carlo ensemble and the analytic
/// moments of the same configuration.
struct MomentComparison {
    int n = 0;
    int steps = 0;
    std::int64_t replicates = 0;
    Eigen::MatrixXd rel_err_var;  // |empirical - exact| / exact
    Eigen::MatrixXd z_mean;       // (mean_s - theta) / sqrt(var_s / R)
    Eigen::MatrixXd coverage;     // in-band fraction; NaN when untracked
    bool has_coverage = false;

    double max_rel_err_var = 0.0;
    double max_abs_z = 0.0;
    double min_coverage = 1.0;    // over tracked cells

    std::string to_text() const;  // one record per (agent, t)
};

/// Throws ProvenanceMismatch if the grids differ in shape.
MomentComparison compare_moments(const Ensemble& ensemble, const MomentTrajectory& analytic);

}  // namespace beliefnet
