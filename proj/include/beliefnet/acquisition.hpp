#pragma once

#include <Eigen/Dense>

#include "beliefnet/common.hpp"

namespace beliefnet {

/// Per-agent information-acquisition constants: cost scale a, cost
/// curvature b, accuracy weight r. All strictly positive.
struct RiParams {
    double a = 1.0;
    double b = 1.0;
    double r = 1.0;
};

/// Throws DomainError unless a, b, r are all strictly positive and finite.
void validate_params(const RiParams& p);

/// Acquisition cost a * sigma2^(-b); strictly decreasing in sigma2.
double acquisition_cost(double sigma2, const RiParams& p);

/// Expected utility of choosing initial variance sigma2:
/// -r*sigma2 - a*sigma2^(-b). The accuracy term collapses analytically
/// because the published signal has mean-squared error exactly sigma2.
double expected_utility(double sigma2, const RiParams& p);

/// The variance maximizing expected_utility: (r/(a*b))^(-1/(b+1)).
double optimal_variance(const RiParams& p);

/// True state plus each agent's utility-maximizing initial variance.
struct InitialBeliefs {
    double theta = 0.0;
    Eigen::VectorXd variances;
};

/// Elementwise optimal_variance over a population; agents acquire
/// independently. DomainError messages name the offending agent index.
InitialBeliefs form_initial_beliefs(const std::vector<RiParams>& params, double theta);

}  // namespace beliefnet
