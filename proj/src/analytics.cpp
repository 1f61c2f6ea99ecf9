#include "beliefnet/analytics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace beliefnet {

namespace {

constexpr double kEigenvalueFloor = -1e-10;
constexpr double kSymmetryTol = 1e-12;

void require_symmetric(const Eigen::MatrixXd& P) {
    const double asym = (P - P.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol)
        throw NumericError("covariance asymmetry " + sig17(asym) + " exceeds tolerance");
}

void require_psd(const Eigen::MatrixXd& P) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P, Eigen::EigenvaluesOnly);
    const double lambda_min = es.eigenvalues().minCoeff();
    if (lambda_min < kEigenvalueFloor)
        throw NumericError("covariance eigenvalue " + sig17(lambda_min) +
                           " below PSD floor " + sig17(kEigenvalueFloor));
}

}  // namespace

CovarianceState initial_covariance(const Eigen::VectorXd& sigma2_0) {
    const int n = static_cast<int>(sigma2_0.size());
    CovarianceState cov;
    cov.t = 0;
    cov.P = Eigen::MatrixXd::Zero(n, n);
    cov.delta2 = Eigen::VectorXd::Zero(n);
    cov.sigma2 = sigma2_0;
    return cov;
}

Eigen::MatrixXd mixing_matrix(const Eigen::VectorXd& alpha, const Network& net) {
    const int n = net.size();
    if (alpha.size() != n)
        throw DimensionMismatch("alpha has length " + std::to_string(alpha.size()) +
                                ", expected " + std::to_string(n));
    for (int i = 0; i < n; ++i)
        if (alpha[i] < 0 || alpha[i] > 1)
            throw DomainError("alpha[" + std::to_string(i) + "]=" + sig17(alpha[i]) +
                              " outside [0,1]");
    Eigen::MatrixXd m = alpha.asDiagonal() * net.weights();
    m.diagonal() += (1.0 - alpha.array()).matrix();
    return m;
}

CovarianceState propagate_covariance(const CovarianceState& cov, const Network& net,
                                     const Eigen::VectorXd& alpha) {
    const int n = net.size();
    if (cov.P.rows() != n || cov.P.cols() != n || cov.sigma2.size() != n)
        throw DimensionMismatch("covariance state does not match network size " +
                                std::to_string(n));
    require_symmetric(cov.P);

    const Eigen::MatrixXd m = mixing_matrix(alpha, net);
    const Eigen::MatrixXd aw = alpha.asDiagonal() * net.weights();
    Eigen::MatrixXd next = m * cov.P * m.transpose() +
                           aw * cov.sigma2.asDiagonal() * aw.transpose();
    next = ((next + next.transpose()) / 2.0).eval();
    require_psd(next);

    CovarianceState out;
    out.t = cov.t + 1;
    out.P = std::move(next);
    out.delta2 = out.P.diagonal();
    out.sigma2.resize(n);
    const Eigen::VectorXd sigma2_y = net.weights().array().square().matrix() * cov.sigma2;
    for (int i = 0; i < n; ++i)
        out.sigma2[i] = bayesian_update(0.0, cov.sigma2[i], 0.0, sigma2_y[i]).sigma2;
    return out;
}

Eigen::VectorXd signal_variance_exact(const CovarianceState& cov) {
    return cov.delta2 + cov.sigma2;
}

Eigen::VectorXd signal_variance_eq8(const CovarianceState& cov_prev, const Network& net,
                                    const Eigen::VectorXd& alpha,
                                    const Eigen::VectorXd& sigma2_next) {
    const int n = net.size();
    if (cov_prev.P.rows() != n || alpha.size() != n || sigma2_next.size() != n)
        throw DimensionMismatch("eq8 inputs do not match network size " + std::to_string(n));
    const Eigen::ArrayXd a = alpha.array();
    const Eigen::ArrayXd own = (1.0 - a).square() * cov_prev.delta2.array();
    const Eigen::ArrayXd social =
        a.square() * (net.weights().array().square().matrix() *
                      (cov_prev.delta2 + cov_prev.sigma2))
                         .array();
    const Eigen::ArrayXd cross =
        2.0 * a * (1.0 - a) * (net.weights() * cov_prev.P).diagonal().array();
    return (own + social + cross + sigma2_next.array()).matrix();
}

MomentTrajectory analytic_moments(const Network& net, const InitialBeliefs& init, int horizon,
                                  std::optional<double> tol) {
    const int n = net.size();
    if (init.variances.size() != n)
        throw DimensionMismatch("initial variances do not match network size");
    const VarianceSchedule sched = variance_schedule(net, init.variances, horizon, tol);

    MomentTrajectory traj;
    traj.theta = init.theta;
    traj.steps = sched.steps;
    const int rows = sched.steps + 1;
    traj.var_exact.resize(rows, n);
    traj.var_eq8.resize(rows, n);
    traj.sigma2 = sched.sigma2;
    traj.band_lo.resize(rows, n);
    traj.band_hi.resize(rows, n);

    CovarianceState cov = initial_covariance(init.variances);
    for (int t = 0; t < rows; ++t) {
        traj.var_exact.row(t) = signal_variance_exact(cov);
        if (t == 0) {
            // no previous step exists; the closed form coincides with the
            // exact value sigma2_0 here
            traj.var_eq8.row(0) = traj.var_exact.row(0);
        }
        if (t < sched.steps) {
            const Eigen::VectorXd alpha = sched.alpha.row(t);
            CovarianceState next = propagate_covariance(cov, net, alpha);
            traj.var_eq8.row(t + 1) = signal_variance_eq8(cov, net, alpha, next.sigma2);
            cov = std::move(next);
        }
    }
    traj.band_lo = (traj.var_exact.array().sqrt() * -3.0 + traj.theta).matrix();
    traj.band_hi = (traj.var_exact.array().sqrt() * 3.0 + traj.theta).matrix();
    return traj;
}

MomentComparison compare_moments(const Ensemble& ensemble, const MomentTrajectory& analytic) {
    if (ensemble.n != analytic.var_exact.cols() || ensemble.steps != analytic.steps)
        throw ProvenanceMismatch(
            "ensemble grid (" + std::to_string(ensemble.steps) + " steps, " +
            std::to_string(ensemble.n) + " agents) does not match analytic grid (" +
            std::to_string(analytic.steps) + " steps, " +
            std::to_string(analytic.var_exact.cols()) + " agents)");

    const int rows = ensemble.steps + 1;
    const int n = ensemble.n;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    MomentComparison cmp;
    cmp.n = n;
    cmp.steps = ensemble.steps;
    cmp.replicates = ensemble.replicates;
    cmp.has_coverage = ensemble.has_coverage;
    cmp.rel_err_var.resize(rows, n);
    cmp.z_mean.resize(rows, n);
    cmp.coverage = Eigen::MatrixXd::Constant(rows, n, nan);

    for (int t = 0; t < rows; ++t) {
        for (int i = 0; i < n; ++i) {
            const double emp = ensemble.var_s(t, i);
            const double ana = analytic.var_exact(t, i);
            double rel;
            if (ana > 0)
                rel = std::abs(emp - ana) / ana;
            else
                rel = emp == 0 ? 0.0 : std::numeric_limits<double>::infinity();
            cmp.rel_err_var(t, i) = rel;

            const double se2 = emp / static_cast<double>(ensemble.replicates);
            const double dev = ensemble.mean_s(t, i) - analytic.theta;
            double z;
            if (se2 > 0)
                z = dev / std::sqrt(se2);
            else
                z = dev == 0 ? 0.0 : std::numeric_limits<double>::infinity();
            cmp.z_mean(t, i) = z;

            if (ensemble.has_coverage) {
                const double frac = static_cast<double>(ensemble.in_band(t, i)) /
                                    static_cast<double>(ensemble.replicates);
                cmp.coverage(t, i) = frac;
                cmp.min_coverage = std::min(cmp.min_coverage, frac);
            }
            cmp.max_rel_err_var = std::max(cmp.max_rel_err_var, rel);
            cmp.max_abs_z = std::max(cmp.max_abs_z, std::abs(z));
        }
    }
    return cmp;
}

std::string MomentComparison::to_text() const {
    std::ostringstream os;
    os << "agent t rel_err_var z_mean coverage\n";
    for (int i = 0; i < n; ++i)
        for (int t = 0; t <= steps; ++t) {
            os << i << " " << t << " " << sig17(rel_err_var(t, i)) << " "
               << sig17(z_mean(t, i)) << " ";
            if (has_coverage)
                os << sig17(coverage(t, i));
            else
                os << "-";
            os << "\n";
        }
    os << "# max_rel_err_var " << sig17(max_rel_err_var) << "\n";
    os << "# max_abs_z " << sig17(max_abs_z) << "\n";
    if (has_coverage) os << "# min_coverage " << sig17(min_coverage) << "\n";
    return os.str();
}

}  // namespace beliefnet
