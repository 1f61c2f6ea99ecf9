#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "beliefnet/analytics.hpp"
#include "beliefnet/config.hpp"
#include "beliefnet/csv.hpp"
#include "beliefnet/estimation.hpp"
#include "beliefnet/network.hpp"

namespace {

// exit codes are a stable contract: 0 success, 2 config/input error,
// 3 numeric failure, 4 comparison failure
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitComparison = 4;

/// Requested worker count resolved against the machine and the
/// BELIEFNET_THREADS cap; 0 means one worker per hardware thread.
int resolve_workers(int requested) {
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    int workers = requested == 0 ? hw : requested;
    if (const char* env = std::getenv("BELIEFNET_THREADS")) {
        int cap = 0;
        try {
            cap = std::stoi(env);
        } catch (const std::exception&) {
            throw beliefnet::ConfigError("BELIEFNET_THREADS='" + std::string(env) +
                                         "' is not an integer");
        }
        if (cap < 0) throw beliefnet::ConfigError("BELIEFNET_THREADS must be >= 0");
        workers = std::min(workers, cap == 0 ? hw : cap);
    }
    return std::max(1, workers);
}

void ensure_output_dir(const beliefnet::RunConfig& cfg) {
    if (cfg.output.dir != ".") std::filesystem::create_directories(cfg.output.dir);
}

beliefnet::GraphKind parse_kind(const std::string& name) {
    if (name == "ba" || name == "barabasi_albert") return beliefnet::GraphKind::barabasi_albert;
    if (name == "complete") return beliefnet::GraphKind::complete;
    if (name == "ring") return beliefnet::GraphKind::ring;
    throw beliefnet::ConfigError("unknown network kind '" + name + "' (ba, complete, ring)");
}

struct GenerateArgs {
    std::string kind;
    int n = 0;
    int m = 3;
    int k = 1;
    std::uint64_t seed = 0;
    std::string out;
};

void cmd_generate(const GenerateArgs& args) {
    beliefnet::GraphSpec spec;
    spec.kind = parse_kind(args.kind);
    spec.n = args.n;
    spec.m = args.m;
    spec.k = args.k;
    spec.seed = args.seed;
    const beliefnet::Network net = beliefnet::generate(spec);
    beliefnet::save_network(net, args.out);
    std::cout << "wrote " << args.out << " (n " << net.size() << ", mean out-degree "
              << net.mean_out_degree() << ")\n";
}

struct SimulateArgs {
    std::string config;
    std::string moments_out;       // overrides [output] moments
    std::string bands_in;          // analytic CSV whose bands are tracked
    std::string coverage_out;      // overrides [output] coverage
    bool record_trajectories = false;
    std::string trajectories_out;  // overrides [output] trajectories
    std::vector<int> histogram_steps;
    std::string histograms_out;    // overrides [output] histograms
    int workers = 0;
};

void cmd_simulate(const SimulateArgs& args) {
    beliefnet::RunConfig cfg = beliefnet::load_run_config(args.config);
    if (args.record_trajectories || !args.trajectories_out.empty()) {
        cfg.sim.record = beliefnet::series::all;
        if (cfg.output.trajectories.empty()) cfg.output.trajectories = "trajectories.csv";
    }
    cfg.sim.histogram_steps = args.histogram_steps;
    ensure_output_dir(cfg);

    const beliefnet::Network net = beliefnet::build_network(cfg);
    const beliefnet::InitialBeliefs init = beliefnet::build_initial_beliefs(cfg, net.size());

    std::optional<beliefnet::MomentTrajectory> analytic;
    std::optional<beliefnet::Bands> bands;
    if (!args.bands_in.empty()) {
        analytic = beliefnet::read_analytic_csv(args.bands_in);
        if (analytic->theta != cfg.sim.theta)
            throw beliefnet::ProvenanceMismatch(
                "bands file theta " + beliefnet::sig17(analytic->theta) +
                " does not match configured theta " + beliefnet::sig17(cfg.sim.theta));
        bands = analytic->bands();
    }

    const beliefnet::Ensemble ensemble = beliefnet::simulate_ensemble(
        net, init, cfg.sim, resolve_workers(args.workers), bands ? &*bands : nullptr);

    const std::string moments_path =
        args.moments_out.empty() ? cfg.output.path(cfg.output.moments) : args.moments_out;
    beliefnet::write_moment_csv(moments_path, ensemble);
    std::cout << "wrote " << moments_path << "\n";

    if (bands) {
        const std::string coverage_path =
            args.coverage_out.empty() ? cfg.output.path(cfg.output.coverage) : args.coverage_out;
        beliefnet::write_coverage_csv(coverage_path, ensemble);
        std::cout << "wrote " << coverage_path << "\n";
    }
    if (cfg.sim.record != 0) {
        const std::string traj_path = args.trajectories_out.empty()
                                          ? cfg.output.path(cfg.output.trajectories)
                                          : args.trajectories_out;
        beliefnet::write_trajectory_csv(traj_path, ensemble);
        std::cout << "wrote " << traj_path << "\n";
    }
    if (!cfg.sim.histogram_steps.empty()) {
        const std::string hist_path = args.histograms_out.empty()
                                          ? cfg.output.path(cfg.output.histograms)
                                          : args.histograms_out;
        beliefnet::write_histogram_csv(hist_path, ensemble);
        std::cout << "wrote " << hist_path << "\n";
    }
}

struct AnalyzeArgs {
    std::string config;
    std::string out;
};

void cmd_analyze(const AnalyzeArgs& args) {
    const beliefnet::RunConfig cfg = beliefnet::load_run_config(args.config);
    ensure_output_dir(cfg);
    const beliefnet::Network net = beliefnet::build_network(cfg);
    const beliefnet::InitialBeliefs init = beliefnet::build_initial_beliefs(cfg, net.size());
    const beliefnet::MomentTrajectory traj =
        beliefnet::analytic_moments(net, init, cfg.sim.horizon, cfg.sim.convergence_tol);
    const std::string path = args.out.empty() ? cfg.output.path(cfg.output.analytic) : args.out;
    beliefnet::write_analytic_csv(path, traj);
    std::cout << "wrote " << path << "\n";
}

struct CompareArgs {
    std::string moments;
    std::string analytic;
    std::string coverage;
    std::string report;
    double floor = 0.99;
    double max_z = 4.0;
};

int cmd_compare(const CompareArgs& args) {
    beliefnet::Ensemble ensemble = beliefnet::read_moment_csv(args.moments);
    const beliefnet::MomentTrajectory traj = beliefnet::read_analytic_csv(args.analytic);
    if (!args.coverage.empty()) beliefnet::read_coverage_csv(args.coverage, ensemble);

    const beliefnet::MomentComparison cmp = beliefnet::compare_moments(ensemble, traj);
    const std::string text = cmp.to_text();
    if (args.report.empty()) {
        std::cout << text;
    } else {
        std::ofstream os(args.report, std::ios::binary);
        if (!os) throw beliefnet::IoError("cannot open " + args.report + " for writing");
        os << text;
        os.flush();
        if (!os) throw beliefnet::IoError("write to " + args.report + " failed");
        std::cout << "wrote " << args.report << "\n";
    }

    bool failed = false;
    if (cmp.max_abs_z > args.max_z) {
        std::cerr << "comparison failed: max |z| " << cmp.max_abs_z << " exceeds " << args.max_z
                  << "\n";
        failed = true;
    }
    if (cmp.has_coverage && cmp.min_coverage < args.floor) {
        std::cerr << "comparison failed: coverage " << cmp.min_coverage << " below floor "
                  << args.floor << "\n";
        failed = true;
    }
    if (!failed) std::cout << "comparison passed\n";
    return failed ? kExitComparison : kExitOk;
}

struct FitArgs {
    std::string observations;
    std::string mode;
    bool weighted = false;
    double a = 0.0;
    double b = 0.0;
    std::string out;
};

void cmd_fit(const FitArgs& args) {
    std::ostringstream report;
    if (args.mode == "cost") {
        const std::vector<beliefnet::CostObservation> obs =
            beliefnet::read_cost_csv(args.observations);
        report << beliefnet::fit_cost_power_law(obs, args.weighted).to_text();
    } else {
        const std::vector<beliefnet::RewardObservation> obs =
            beliefnet::read_reward_csv(args.observations);
        if (obs.empty())
            throw beliefnet::ConfigError(args.observations + " holds no observations");
        if (!(args.a > 0) || !(args.b > 0))
            throw beliefnet::ConfigError("reward mode needs --a and --b from a prior cost fit");
        report << "reward,variance,r,predicted_variance\n";
        for (const beliefnet::RewardObservation& o : obs) {
            const double r = beliefnet::estimate_r(o.variance, args.a, args.b);
            report << beliefnet::sig17(o.reward) << "," << beliefnet::sig17(o.variance) << ","
                   << beliefnet::sig17(r) << ","
                   << beliefnet::sig17(beliefnet::predict_variance(r, args.a, args.b)) << "\n";
        }
    }
    if (args.out.empty()) {
        std::cout << report.str();
    } else {
        std::ofstream os(args.out, std::ios::binary);
        if (!os) throw beliefnet::IoError("cannot open " + args.out + " for writing");
        os << report.str();
        os.flush();
        if (!os) throw beliefnet::IoError("write to " + args.out + " failed");
        std::cout << "wrote " << args.out << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian social learning on directed weighted networks"};
    app.require_subcommand(1);
    int exit_code = kExitOk;

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Generate a network file");
    generate->add_option("--kind", gen.kind, "ba, complete or ring")->required();
    generate->add_option("--n", gen.n, "agent count")->required();
    generate->add_option("--m", gen.m, "BA attachment parameter")->capture_default_str();
    generate->add_option("--k", gen.k, "ring neighbor span")->capture_default_str();
    generate->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
    generate->add_option("--out", gen.out, "output network file")->required();
    generate->callback([&] { cmd_generate(gen); });

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo ensemble");
    simulate->add_option("-c,--config", sim.config, "run config file")->required();
    simulate->add_option("-o,--out", sim.moments_out, "moment CSV path override");
    simulate->add_option("--bands", sim.bands_in,
                         "analytic CSV whose 3-sigma bands are tracked during the run");
    simulate->add_option("--coverage", sim.coverage_out, "coverage sidecar path override");
    simulate->add_flag("--record-trajectories", sim.record_trajectories,
                       "keep per-replicate series");
    simulate->add_option("--trajectories", sim.trajectories_out,
                         "trajectory CSV path override (implies --record-trajectories)");
    simulate->add_option("--histogram", sim.histogram_steps, "steps to histogram, e.g. 1,5,30")
        ->delimiter(',');
    simulate->add_option("--histograms", sim.histograms_out, "histogram CSV path override");
    simulate->add_option("--workers", sim.workers, "worker threads (0 = auto)")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    simulate->callback([&] { cmd_simulate(sim); });

    AnalyzeArgs ana;
    CLI::App* analyze = app.add_subcommand("analyze", "Write closed-form moments");
    analyze->add_option("-c,--config", ana.config, "run config file")->required();
    analyze->add_option("-o,--out", ana.out, "analytic CSV path override");
    analyze->callback([&] { cmd_analyze(ana); });

    CompareArgs cmp;
    CLI::App* compare = app.add_subcommand("compare", "Check a simulation against analytics");
    compare->add_option("moments", cmp.moments, "moment CSV from simulate")->required();
    compare->add_option("analytic", cmp.analytic, "analytic CSV from analyze")->required();
    compare->add_option("--coverage", cmp.coverage, "coverage sidecar from simulate --bands");
    compare->add_option("--report", cmp.report, "write the report here instead of stdout");
    compare->add_option("--floor", cmp.floor, "minimum 3-sigma coverage")->capture_default_str();
    compare->add_option("--max-z", cmp.max_z, "largest tolerated |mean z-score|")->capture_default_str();
    compare->callback([&] { exit_code = cmd_compare(cmp); });

    FitArgs fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit cost or reward observations");
    fit_cmd->add_option("observations", fit.observations, "observation CSV")->required();
    fit_cmd->add_option("--mode", fit.mode, "cost or reward")
        ->required()
        ->check(CLI::IsMember({"cost", "reward"}));
    fit_cmd->add_flag("--weighted", fit.weighted, "weight conditions by report count");
    fit_cmd->add_option("--a", fit.a, "cost scale from a prior cost fit");
    fit_cmd->add_option("--b", fit.b, "cost curvature from a prior cost fit");
    fit_cmd->add_option("--out", fit.out, "write the report here instead of stdout");
    fit_cmd->callback([&] { cmd_fit(fit); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    } catch (const beliefnet::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return exit_code;
}
