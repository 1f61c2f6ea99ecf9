#include "beliefnet/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace beliefnet {

namespace {

void require_size(const Eigen::VectorXd& v, int n, const char* what) {
    if (v.size() != n)
        throw DimensionMismatch(std::string(what) + " has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(n));
}

Eigen::VectorXd social_variances(const Network& net, const Eigen::VectorXd& sigma2) {
    return net.weights().array().square().matrix() * sigma2;
}

}  // namespace

SocialSignal combine_social_signal(const Network& net, const SignalVector& signals,
                                   const BeliefState& state) {
    const int n = net.size();
    require_size(signals.s, n, "signal vector");
    require_size(state.sigma2, n, "variance vector");
    SocialSignal out;
    out.eta = net.weights() * signals.s;
    out.sigma2_y = social_variances(net, state.sigma2);
    out.alpha.resize(n);
    for (int i = 0; i < n; ++i)
        out.alpha[i] = bayesian_update(0.0, state.sigma2[i], 0.0, out.sigma2_y[i]).alpha;
    return out;
}

UpdateResult bayesian_update(double pi, double sigma2, double eta, double sigma2_y) {
    if (sigma2 < 0 || sigma2_y < 0)
        throw DomainError("variances must be non-negative, got sigma2=" + sig17(sigma2) +
                          " sigma2_y=" + sig17(sigma2_y));
    if (sigma2 == 0)  // point-mass belief cannot be sharpened
        return {pi, 0.0, 0.0};
    if (sigma2_y == 0)  // perfect social signal dominates
        return {eta, 0.0, 1.0};
    const double alpha = sigma2 / (sigma2 + sigma2_y);
    return {alpha * eta + (1.0 - alpha) * pi, sigma2 * sigma2_y / (sigma2 + sigma2_y), alpha};
}

SignalVector draw_signals(const BeliefState& state, Rng& rng) {
    std::normal_distribution<double> unit;
    SignalVector out;
    out.t = state.t;
    out.s.resize(state.pi.size());
    for (Eigen::Index i = 0; i < state.pi.size(); ++i)
        out.s[i] = state.pi[i] + std::sqrt(state.sigma2[i]) * unit(rng);
    return out;
}

BeliefState step(const Network& net, const BeliefState& state, const SignalVector& signals) {
    if (state.t != signals.t)
        throw DimensionMismatch("step: state at t=" + std::to_string(state.t) +
                                " but signals at t=" + std::to_string(signals.t));
    const SocialSignal social = combine_social_signal(net, signals, state);
    BeliefState out;
    out.t = state.t + 1;
    out.pi.resize(net.size());
    out.sigma2.resize(net.size());
    for (int i = 0; i < net.size(); ++i) {
        const UpdateResult u =
            bayesian_update(state.pi[i], state.sigma2[i], social.eta[i], social.sigma2_y[i]);
        out.pi[i] = u.pi;
        out.sigma2[i] = u.sigma2;
    }
    return out;
}

VarianceSchedule variance_schedule(const Network& net, const Eigen::VectorXd& sigma2_0,
                                   int horizon, std::optional<double> tol) {
    const int n = net.size();
    require_size(sigma2_0, n, "initial variance vector");
    if (horizon < 0) throw ConfigError("horizon must be >= 0");
    for (int i = 0; i < n; ++i)
        if (sigma2_0[i] < 0 || !std::isfinite(sigma2_0[i]))
            throw DomainError("agent " + std::to_string(i) + ": initial variance must be finite and >= 0");

    VarianceSchedule sched;
    sched.sigma2.resize(horizon + 1, n);
    sched.sigma2_y.resize(horizon + 1, n);
    sched.alpha.resize(horizon + 1, n);

    Eigen::VectorXd sigma2 = sigma2_0;
    int steps = horizon;
    for (int t = 0; t <= horizon; ++t) {
        const Eigen::VectorXd sigma2_y = social_variances(net, sigma2);
        sched.sigma2.row(t) = sigma2;
        sched.sigma2_y.row(t) = sigma2_y;
        Eigen::VectorXd next(n);
        for (int i = 0; i < n; ++i) {
            const UpdateResult u = bayesian_update(0.0, sigma2[i], 0.0, sigma2_y[i]);
            sched.alpha(t, i) = u.alpha;
            next[i] = u.sigma2;
        }
        if (tol && sigma2.maxCoeff() < *tol) {
            steps = t;
            break;
        }
        sigma2 = next;
    }
    if (steps < horizon) {
        sched.sigma2.conservativeResize(steps + 1, n);
        sched.sigma2_y.conservativeResize(steps + 1, n);
        sched.alpha.conservativeResize(steps + 1, n);
    }
    sched.steps = steps;
    return sched;
}

namespace {

/// One-pass mean/M2 accumulator over replicates for every (step, agent)
/// cell, plus coverage counts and histogram bins. Chunks are merged in
/// fixed index order so the final reduction is independent of the thread
/// layout that produced them.
struct ChunkStats {
    std::int64_t count = 0;
    Eigen::MatrixXd mean_s, m2_s, mean_pi, m2_pi;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> in_band;
    std::map<std::pair<int, int>, std::map<long, long>> histograms;

    void init(int rows, int n) {
        mean_s = Eigen::MatrixXd::Zero(rows, n);
        m2_s = Eigen::MatrixXd::Zero(rows, n);
        mean_pi = Eigen::MatrixXd::Zero(rows, n);
        m2_pi = Eigen::MatrixXd::Zero(rows, n);
        in_band = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, n);
    }

    void observe(int t, const Eigen::VectorXd& s, const Eigen::VectorXd& pi) {
        // count was already bumped by the caller once per replicate
        for (int i = 0; i < s.size(); ++i) {
            double d = s[i] - mean_s(t, i);
            mean_s(t, i) += d / static_cast<double>(count);
            m2_s(t, i) += d * (s[i] - mean_s(t, i));
            d = pi[i] - mean_pi(t, i);
            mean_pi(t, i) += d / static_cast<double>(count);
            m2_pi(t, i) += d * (pi[i] - mean_pi(t, i));
        }
    }

    void merge(const ChunkStats& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double tot = na + nb;
        auto combine = [&](Eigen::MatrixXd& mean, Eigen::MatrixXd& m2,
                           const Eigen::MatrixXd& mean_b, const Eigen::MatrixXd& m2_b) {
            const Eigen::MatrixXd delta = mean_b - mean;
            mean += delta * (nb / tot);
            m2 += m2_b + delta.cwiseProduct(delta) * (na * nb / tot);
        };
        combine(mean_s, m2_s, other.mean_s, other.m2_s);
        combine(mean_pi, m2_pi, other.mean_pi, other.m2_pi);
        in_band += other.in_band;
        for (const auto& [key, bins] : other.histograms)
            for (const auto& [bin, c] : bins) histograms[key][bin] += c;
        count += other.count;
    }
};

}  // namespace

Ensemble simulate_ensemble(const Network& net, const InitialBeliefs& init, const SimConfig& cfg,
                           int workers, const Bands* coverage_bands) {
    const int n = net.size();
    require_size(init.variances, n, "initial variance vector");
    if (cfg.replicates < 1) throw ConfigError("replicates must be >= 1");
    if (cfg.horizon < 0) throw ConfigError("horizon must be >= 0");
    if (!std::isfinite(cfg.theta)) throw ConfigError("theta must be finite");

    const VarianceSchedule sched =
        variance_schedule(net, init.variances, cfg.horizon, cfg.convergence_tol);
    const int steps = sched.steps;
    const int rows = steps + 1;
    if (coverage_bands &&
        (coverage_bands->lo.rows() < rows || coverage_bands->lo.cols() != n ||
         coverage_bands->hi.rows() < rows || coverage_bands->hi.cols() != n))
        throw DimensionMismatch("coverage bands smaller than the recorded grid");

    std::vector<bool> hist_at(rows, false);
    for (int t : cfg.histogram_steps)
        if (t >= 0 && t < rows) hist_at[t] = true;

    const std::int64_t replicates = cfg.replicates;
    const std::int64_t chunk_target = std::min<std::int64_t>(replicates, 64);
    const std::int64_t chunk_size = (replicates + chunk_target - 1) / chunk_target;
    const std::int64_t chunk_count = (replicates + chunk_size - 1) / chunk_size;

    Ensemble out;
    out.n = n;
    out.steps = steps;
    out.replicates = replicates;
    out.config = cfg;
    out.sigma2 = sched.sigma2;
    out.has_coverage = coverage_bands != nullptr;
    if (cfg.record & series::signals) out.traj_signals.resize(replicates);
    if (cfg.record & series::means) out.traj_means.resize(replicates);
    if (cfg.record & series::variances) out.traj_variances.resize(replicates);

    std::vector<ChunkStats> chunks(chunk_count);
    std::atomic<std::int64_t> next_chunk{0};

    auto run_chunk = [&](std::int64_t c) {
        ChunkStats& acc = chunks[c];
        acc.init(rows, n);
        const std::int64_t lo = c * chunk_size;
        const std::int64_t hi = std::min(replicates, lo + chunk_size);
        for (std::int64_t rep = lo; rep < hi; ++rep) {
            Rng rng(stream_seed(cfg.seed, static_cast<std::uint64_t>(rep)));
            BeliefState state{0, Eigen::VectorXd::Constant(n, cfg.theta), init.variances};
            Eigen::MatrixXd* rec_s = out.traj_signals.empty() ? nullptr : &out.traj_signals[rep];
            Eigen::MatrixXd* rec_pi = out.traj_means.empty() ? nullptr : &out.traj_means[rep];
            Eigen::MatrixXd* rec_v =
                out.traj_variances.empty() ? nullptr : &out.traj_variances[rep];
            if (rec_s) rec_s->resize(rows, n);
            if (rec_pi) rec_pi->resize(rows, n);
            if (rec_v) rec_v->resize(rows, n);
            ++acc.count;
            for (int t = 0; t <= steps; ++t) {
                const SignalVector signals = draw_signals(state, rng);
                acc.observe(t, signals.s, state.pi);
                if (coverage_bands)
                    for (int i = 0; i < n; ++i)
                        if (signals.s[i] >= coverage_bands->lo(t, i) &&
                            signals.s[i] <= coverage_bands->hi(t, i))
                            ++acc.in_band(t, i);
                if (hist_at[t])
                    for (int i = 0; i < n; ++i)
                        ++acc.histograms[{t, i}]
                              [static_cast<long>(std::floor(signals.s[i] / kHistogramBinWidth))];
                if (rec_s) rec_s->row(t) = signals.s;
                if (rec_pi) rec_pi->row(t) = state.pi;
                if (rec_v) rec_v->row(t) = state.sigma2;
                if (t < steps) state = step(net, state, signals);
            }
        }
    };

    const int thread_count =
        std::clamp<int>(workers, 1, static_cast<int>(std::min<std::int64_t>(chunk_count, 256)));
    if (thread_count == 1) {
        for (std::int64_t c = 0; c < chunk_count; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (int w = 0; w < thread_count; ++w)
            pool.emplace_back([&] {
                for (std::int64_t c = next_chunk.fetch_add(1); c < chunk_count;
                     c = next_chunk.fetch_add(1))
                    run_chunk(c);
            });
        for (auto& th : pool) th.join();
    }

    ChunkStats total;
    for (auto& c : chunks) total.merge(c);

    out.mean_s = total.mean_s;
    out.mean_pi = total.mean_pi;
    if (replicates > 1) {
        out.var_s = total.m2_s / static_cast<double>(replicates - 1);
        out.var_pi = total.m2_pi / static_cast<double>(replicates - 1);
    } else {
        out.var_s = Eigen::MatrixXd::Zero(rows, n);
        out.var_pi = Eigen::MatrixXd::Zero(rows, n);
    }
    out.in_band = total.in_band;
    out.histograms = std::move(total.histograms);
    return out;
}

}  // namespace beliefnet
