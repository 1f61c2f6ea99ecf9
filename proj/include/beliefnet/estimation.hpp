#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beliefnet/common.hpp"

namespace beliefnet {

/// One pooled experimental condition: an acquisition-cost proxy and the
/// sample variance of the reports collected under it.
struct CostObservation {
    double cost = 0.0;      // positive cost units (e.g. display seconds)
    double variance = 0.0;  // sample variance of reports, > 0
    long count = 0;         // reports behind the variance, >= 2
};

/// One reward condition: reward level and the sample variance of reports.
struct RewardObservation {
    double reward = 0.0;
    double variance = 0.0;
};

class TooFewReports : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TooFewPoints : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// All observations share one variance value, so the log-log regression
/// has no spread on the abscissa.
class DuplicateAbscissa : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The fitted slope is non-negative: costs do not decrease in variance,
/// so no positive curvature b exists.
class DegenerateFit : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Result of the power-law cost regression C(x) = a x^(-b).
struct CostFit {
    double a = 0.0;
    double b = 0.0;
    double r2 = 0.0;
    std::vector<double> residuals;  // log(cost) - fitted, per observation

    std::string to_text() const;
};

/// Unbiased (n-1 denominator) sample variance of the reports.
double sample_variance(const std::vector<double>& reports);

/// Ordinary least squares on log(cost) = log(a) - b log(variance).
/// With `weighted`, each observation is weighted by its report count.
CostFit fit_cost_power_law(const std::vector<CostObservation>& obs, bool weighted = false);

/// The unique accuracy weight r for which the optimal acquired variance
/// equals the observed one: r = a b variance^(-(b+1)).
double estimate_r(double variance, double a, double b);

/// Variance an agent with cost parameters (a, b) and accuracy weight r
/// would acquire. Delegates to the acquisition closed form.
double predict_variance(double r, double a, double b);

/// Mean relative error of predicted against actual variances.
double evaluate_prediction(const Eigen::VectorXd& predicted, const Eigen::VectorXd& actual);

}  // namespace beliefnet
