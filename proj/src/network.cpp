#include "beliefnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

namespace beliefnet {

std::string Violation::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::NonStochasticRow:
            os << "NonStochasticRow(" << row << ", sum=" << sig17(value) << ")";
            break;
        case Kind::NegativeWeight:
            os << "NegativeWeight(" << row << "," << col << ", w=" << sig17(value) << ")";
            break;
        case Kind::SelfLoop:
            os << "SelfLoop(" << row << ")";
            break;
        case Kind::IsolatedRow:
            os << "IsolatedRow(" << row << ")";
            break;
    }
    return os.str();
}

namespace {

std::string join_violations(const std::vector<Violation>& vs) {
    std::ostringstream os;
    os << "invalid network (" << vs.size() << " violation" << (vs.size() == 1 ? "" : "s") << "):";
    for (const auto& v : vs) os << " " << v.describe();
    return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

int Network::out_degree(int i) const {
    int d = 0;
    for (int j = 0; j < size(); ++j)
        if (j != i && weights_(i, j) > 0) ++d;
    return d;
}

double Network::mean_out_degree() const {
    double total = 0;
    for (int i = 0; i < size(); ++i) total += out_degree(i);
    return total / size();
}

std::vector<Violation> check_weights(const Eigen::MatrixXd& weights, bool allow_self_loops) {
    if (weights.rows() != weights.cols())
        throw DimensionMismatch("weight matrix must be square, got " +
                                std::to_string(weights.rows()) + "x" +
                                std::to_string(weights.cols()));
    const int n = static_cast<int>(weights.rows());
    std::vector<Violation> out;
    for (int i = 0; i < n; ++i) {
        double sum = 0;
        bool has_positive = false;
        for (int j = 0; j < n; ++j) {
            const double w = weights(i, j);
            if (w < 0 || !std::isfinite(w))
                out.push_back({Violation::Kind::NegativeWeight, i, j, w});
            if (w > 0) has_positive = true;
            sum += w;
        }
        if (!allow_self_loops && weights(i, i) != 0.0)
            out.push_back({Violation::Kind::SelfLoop, i, -1, weights(i, i)});
        if (std::abs(sum - 1.0) > Network::kRowSumTol)
            out.push_back({Violation::Kind::NonStochasticRow, i, -1, sum});
        if (!has_positive)
            out.push_back({Violation::Kind::IsolatedRow, i, -1, 0.0});
    }
    return out;
}

Network validate_network(Eigen::MatrixXd weights, bool allow_self_loops) {
    auto violations = check_weights(weights, allow_self_loops);
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return Network(std::move(weights), allow_self_loops);
}

namespace {

Network generate_complete(int n) {
    if (n < 2) throw InvalidSpec("complete network needs n >= 2");
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n, n, 1.0 / (n - 1));
    w.diagonal().setZero();
    return validate_network(std::move(w));
}

Network generate_ring(int n, int k) {
    if (n < 3) throw InvalidSpec("ring network needs n >= 3");
    if (k < 1 || 2 * k >= n)
        throw InvalidSpec("ring span must satisfy 1 <= k < n/2, got k=" + std::to_string(k) +
                          " n=" + std::to_string(n));
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    const double wt = 1.0 / (2 * k);
    for (int i = 0; i < n; ++i) {
        for (int d = 1; d <= k; ++d) {
            w(i, (i + d) % n) = wt;
            w(i, (i - d + n) % n) = wt;
        }
    }
    return validate_network(std::move(w));
}

Network generate_barabasi_albert(int n, int m, std::uint64_t seed) {
    if (m < 1) throw InvalidSpec("BA attachment parameter m must be >= 1");
    if (m >= n) throw InvalidSpec("BA needs m < n, got m=" + std::to_string(m) +
                                  " n=" + std::to_string(n));
    const int m0 = m + 1;  // seed clique, every node starts with degree m
    std::vector<std::unordered_set<int>> adj(n);
    std::vector<int> repeated;  // node i appears deg(i) times
    auto add_edge = [&](int u, int v) {
        adj[u].insert(v);
        adj[v].insert(u);
        repeated.push_back(u);
        repeated.push_back(v);
    };
    for (int i = 0; i < m0 && i < n; ++i)
        for (int j = i + 1; j < m0; ++j) add_edge(i, j);

    std::mt19937_64 rng(seed);
    for (int v = m0; v < n; ++v) {
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < m) {
            std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
            targets.insert(repeated[pick(rng)]);
        }
        for (int t : targets) add_edge(v, t);
    }

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double wt = 1.0 / static_cast<double>(adj[i].size());
        for (int j : adj[i]) w(i, j) = wt;
    }
    return validate_network(std::move(w));
}

}  // namespace

Network generate(const GraphSpec& spec) {
    switch (spec.kind) {
        case GraphKind::complete:
            return generate_complete(spec.n);
        case GraphKind::ring:
            return generate_ring(spec.n, spec.k);
        case GraphKind::barabasi_albert:
            return generate_barabasi_albert(spec.n, spec.m, spec.seed);
        case GraphKind::custom_file:
            return load_network(spec.file);
    }
    throw InvalidSpec("unknown graph kind");
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    const int n = net.size();
    out << "n " << n << "\n";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (net.weight(i, j) != 0.0)
                out << i << " " << j << " " << sig17(net.weight(i, j)) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

Network load_network(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);

    Eigen::MatrixXd w;
    int n = -1;
    std::string line;
    long lineno = 0;
    std::set<std::pair<int, int>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        if (n < 0) {
            std::string tag;
            if (!(is >> tag)) continue;  // blank/comment before header
            long count;
            if (tag != "n" || !(is >> count) || count < 1)
                throw ParseError("expected header `n <count>`", lineno);
            n = static_cast<int>(count);
            w = Eigen::MatrixXd::Zero(n, n);
            continue;
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        long i, j;
        double weight;
        if (!(is >> i >> j >> weight))
            throw ParseError("expected `i j w`, got: " + line, lineno);
        std::string rest;
        if (is >> rest) throw ParseError("trailing token: " + rest, lineno);
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw ParseError("edge index out of range [0," + std::to_string(n) + ")", lineno);
        if (!seen.insert({static_cast<int>(i), static_cast<int>(j)}).second)
            throw ParseError("duplicate entry " + std::to_string(i) + " " + std::to_string(j),
                             lineno);
        w(i, j) = weight;
    }
    if (n < 0) throw ParseError("missing header `n <count>`", lineno);

    // Renormalize rows whose sums are off by decimal-text rounding only.
    for (int i = 0; i < n; ++i) {
        const double sum = w.row(i).sum();
        const double err = std::abs(sum - 1.0);
        if (err > Network::kRowSumTol && err <= 1e-6 && sum > 0) {
            w.row(i) /= sum;
            if (warnings)
                warnings->push_back("row " + std::to_string(i) + " renormalized (sum was " +
                                    sig17(sum) + ")");
        }
    }
    return validate_network(std::move(w));
}

}  // namespace beliefnet
