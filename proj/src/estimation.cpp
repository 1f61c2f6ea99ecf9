#include "beliefnet/estimation.hpp"

#include <cmath>
#include <sstream>

#include "beliefnet/acquisition.hpp"

namespace beliefnet {

double sample_variance(const std::vector<double>& reports) {
    const std::size_t n = reports.size();
    if (n < 2)
        throw TooFewReports("sample variance needs at least 2 reports, got " +
                            std::to_string(n));
    double mean = 0.0;
    for (double x : reports) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : reports) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(n - 1);
}

CostFit fit_cost_power_law(const std::vector<CostObservation>& obs, bool weighted) {
    if (obs.size() < 2)
        throw TooFewPoints("power-law fit needs at least 2 observations, got " +
                           std::to_string(obs.size()));
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const CostObservation& o = obs[i];
        if (!(o.cost > 0) || !std::isfinite(o.cost))
            throw DomainError("observation " + std::to_string(i) + ": cost must be > 0, got " +
                              sig17(o.cost));
        if (!(o.variance > 0) || !std::isfinite(o.variance))
            throw DomainError("observation " + std::to_string(i) +
                              ": variance must be > 0, got " + sig17(o.variance));
        if (o.count < 2)
            throw DomainError("observation " + std::to_string(i) + ": count must be >= 2, got " +
                              std::to_string(o.count));
    }

    const std::size_t n = obs.size();
    std::vector<double> x(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(obs[i].variance);
        y[i] = std::log(obs[i].cost);
        w[i] = weighted ? static_cast<double>(obs[i].count) : 1.0;
    }

    double wsum = 0.0, xbar = 0.0, ybar = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        wsum += w[i];
        xbar += w[i] * x[i];
        ybar += w[i] * y[i];
    }
    xbar /= wsum;
    ybar /= wsum;

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
        sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
    }
    if (sxx == 0)
        throw DuplicateAbscissa("all observations share variance " + sig17(obs[0].variance));

    const double slope = sxy / sxx;
    if (slope >= 0)
        throw DegenerateFit("fitted slope " + sig17(slope) +
                            " is non-negative; costs do not decrease in variance");

    CostFit fit;
    fit.a = std::exp(ybar - slope * xbar);
    fit.b = -slope;
    fit.residuals.resize(n);
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (ybar + slope * (x[i] - xbar));
        fit.residuals[i] = e;
        ss_res += w[i] * e * e;
        ss_tot += w[i] * (y[i] - ybar) * (y[i] - ybar);
    }
    fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

std::string CostFit::to_text() const {
    std::ostringstream os;
    os << "a " << sig17(a) << "\n";
    os << "b " << sig17(b) << "\n";
    os << "r2 " << sig17(r2) << "\n";
    for (std::size_t i = 0; i < residuals.size(); ++i)
        os << "residual " << i << " " << sig17(residuals[i]) << "\n";
    return os.str();
}

double estimate_r(double variance, double a, double b) {
    if (!(variance > 0) || !(a > 0) || !(b > 0))
        throw DomainError("estimate_r needs positive inputs, got variance=" + sig17(variance) +
                          " a=" + sig17(a) + " b=" + sig17(b));
    return a * b * std::pow(variance, -(b + 1.0));
}

double predict_variance(double r, double a, double b) {
    return optimal_variance({a, b, r});
}

double evaluate_prediction(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual) {
    if (predicted.size() != actual.size())
        throw DimensionMismatch("predicted has length " + std::to_string(predicted.size()) +
                                ", actual has length " + std::to_string(actual.size()));
    if (actual.size() == 0) throw DomainError("evaluate_prediction needs at least one entry");
    double total = 0.0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        if (!(actual[i] > 0))
            throw DomainError("actual[" + std::to_string(i) + "]=" + sig17(actual[i]) +
                              " must be > 0");
        total += std::abs(predicted[i] - actual[i]) / actual[i];
    }
    return total / static_cast<double>(actual.size());
}

}  // namespace beliefnet
