#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "beliefnet/common.hpp"

namespace beliefnet {

struct Violation {
    enum class Kind { NonStochasticRow, NegativeWeight, SelfLoop, IsolatedRow };
    Kind kind;
    int row = -1;
    int col = -1;       // set for NegativeWeight only
    double value = 0;   // row sum or offending weight
    std::string describe() const;
};

/// Thrown by validate_network; carries the complete list of violated
/// constraints, not just the first one found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Directed weighted influence network with a row-stochastic weight matrix.
/// weights()(i, j) is agent j's influence on agent i. Immutable after
/// construction; safe to share read-only across threads.
class Network {
public:
    static constexpr double kRowSumTol = 1e-9;

    int size() const { return static_cast<int>(weights_.rows()); }
    const Eigen::MatrixXd& weights() const { return weights_; }
    double weight(int i, int j) const { return weights_(i, j); }
    bool self_loops_allowed() const { return allow_self_loops_; }

    /// Number of strictly positive off-diagonal entries in row i.
    int out_degree(int i) const;
    /// Mean out_degree over all agents.
    double mean_out_degree() const;

    bool operator==(const Network& other) const {
        return weights_ == other.weights_ && allow_self_loops_ == other.allow_self_loops_;
    }

private:
    Network(Eigen::MatrixXd w, bool allow_self_loops)
        : weights_(std::move(w)), allow_self_loops_(allow_self_loops) {}

    friend Network validate_network(Eigen::MatrixXd, bool);

    Eigen::MatrixXd weights_;
    bool allow_self_loops_ = false;
};

/// Checks the Network invariants and returns every violation found:
/// row sums within kRowSumTol of 1, no negative entries, zero diagonal
/// (unless allow_self_loops), and at least one positive entry per row.
std::vector<Violation> check_weights(const Eigen::MatrixXd& weights, bool allow_self_loops = false);

/// Returns a validated Network or throws ValidationError listing all
/// violated constraints. The matrix must be square.
Network validate_network(Eigen::MatrixXd weights, bool allow_self_loops = false);

enum class GraphKind { barabasi_albert, complete, ring, custom_file };

class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct GraphSpec {
    GraphKind kind = GraphKind::complete;
    int n = 0;
    int m = 3;                  // BA attachment parameter
    int k = 1;                  // ring neighbor span
    std::uint64_t seed = 0;
    std::string file;           // custom_file path
};

/// Generates a network from a spec. Deterministic: the same spec always
/// yields a bit-identical network.
///
/// barabasi_albert: undirected preferential attachment (seed clique of
/// m+1 nodes, each later node attaches m edges to distinct targets chosen
/// proportionally to degree), symmetrized into a directed graph with
/// uniform row weights 1/outdeg(i).
/// complete: w_{i,j} = 1/(n-1) off-diagonal.
/// ring: each agent weights its 2k nearest neighbors 1/(2k).
Network generate(const GraphSpec& spec);

/// Plain-text edge list: first line `n <count>`, then `i j w` per edge
/// (0-based, weight with 17 significant digits); `#` starts a comment.
/// Unlisted pairs are weight 0.
void save_network(const Network& net, const std::string& path);

/// Loads and validates a network file. Rows whose sum deviates from 1 by
/// more than kRowSumTol but at most 1e-6 are renormalized, with a note
/// appended to `warnings`; larger deviations are ValidationErrors.
Network load_network(const std::string& path, std::vector<std::string>* warnings = nullptr);

}  // namespace beliefnet
