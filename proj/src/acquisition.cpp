#include "beliefnet/acquisition.hpp"

#include <cmath>
#include <string>

namespace beliefnet {

void validate_params(const RiParams& p) {
    auto bad = [](double v) { return !(v > 0) || !std::isfinite(v); };
    if (bad(p.a)) throw DomainError("cost scale a must be > 0, got " + sig17(p.a));
    if (bad(p.b)) throw DomainError("cost curvature b must be > 0, got " + sig17(p.b));
    if (bad(p.r)) throw DomainError("accuracy weight r must be > 0, got " + sig17(p.r));
}

double acquisition_cost(double sigma2, const RiParams& p) {
    validate_params(p);
    if (!(sigma2 > 0) || !std::isfinite(sigma2))
        throw DomainError("variance must be > 0, got " + sig17(sigma2));
    return p.a * std::pow(sigma2, -p.b);
}

double expected_utility(double sigma2, const RiParams& p) {
    return -p.r * sigma2 - acquisition_cost(sigma2, p);
}

double optimal_variance(const RiParams& p) {
    validate_params(p);
    return std::pow(p.r / (p.a * p.b), -1.0 / (p.b + 1.0));
}

InitialBeliefs form_initial_beliefs(const std::vector<RiParams>& params, double theta) {
    InitialBeliefs out;
    out.theta = theta;
    out.variances.resize(static_cast<Eigen::Index>(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        try {
            out.variances[static_cast<Eigen::Index>(i)] = optimal_variance(params[i]);
        } catch (const DomainError& e) {
            throw DomainError("agent " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace beliefnet
