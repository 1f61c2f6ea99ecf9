#pragma once

#include <string>

#include "beliefnet/acquisition.hpp"
#include "beliefnet/dynamics.hpp"
#include "beliefnet/network.hpp"

namespace beliefnet {

/// How the population's initial belief variances are assigned.
enum class AgentMode {
    uniform_variance,  // sigma2_0 drawn uniformly from [sigma2_min, sigma2_max]
    homogeneous,       // one RiParams shared by all agents
    per_agent,         // one RiParams per agent from params_file
};

struct AgentConfig {
    AgentMode mode = AgentMode::homogeneous;
    double sigma2_min = 0.0;
    double sigma2_max = 0.0;
    RiParams shared;
    std::string params_file;
};

/// Output directory and file names; an empty trajectories name means the
/// run keeps no per-replicate series.
struct OutputConfig {
    std::string dir = ".";
    std::string moments = "moments.csv";
    std::string analytic = "analytic.csv";
    std::string trajectories;
    std::string histograms = "histograms.csv";
    std::string coverage = "coverage.csv";

    std::string path(const std::string& name) const { return dir + "/" + name; }
};

/// One experiment, declaratively: network source, agent parameters,
/// simulation settings, output layout.
struct RunConfig {
    GraphSpec graph;
    AgentConfig agents;
    SimConfig sim;
    OutputConfig output;
};

/// Parses a sectioned key = value file ([network], [agents], [sim],
/// [output]; `#` and `;` comments). Unknown sections or keys are
/// ConfigErrors, syntax problems are ParseErrors with line numbers.
RunConfig load_run_config(const std::string& path);

/// Generates or loads the configured network.
Network build_network(const RunConfig& cfg);

/// Materializes initial beliefs for `n` agents. The uniform-variance mode
/// draws from its own derived stream, so the simulation's replicate
/// streams stay untouched.
InitialBeliefs build_initial_beliefs(const RunConfig& cfg, int n);

}  // namespace beliefnet
