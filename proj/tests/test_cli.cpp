#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "beliefnet/csv.hpp"
#include "beliefnet/estimation.hpp"
#include "beliefnet/network.hpp"
#include "oracles.hpp"

using namespace beliefnet;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::current_path() / "cli_scratch" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary);
    os << body;
}

RunResult run_cli(const fs::path& dir, const std::string& args, const std::string& env = "") {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    std::string cmd;
    if (!env.empty()) cmd += env + " ";
    cmd += std::string(BELIEFNET_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
           err.string();
    const int rc = std::system(cmd.c_str());
    RunResult res;
    if (rc != -1 && WIFEXITED(rc)) res.code = WEXITSTATUS(rc);
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

std::string small_config(const fs::path& dir) {
    const fs::path cfg = dir / "run.ini";
    spit(cfg,
         "[network]\n"
         "kind = complete\n"
         "n = 5\n"
         "\n"
         "[agents]\n"
         "mode = homogeneous\n"
         "a = 1\n"
         "b = 1\n"
         "r = 20\n"
         "\n"
         "[sim]\n"
         "theta = 0.6\n"
         "horizon = 5\n"
         "replicates = 2000\n"
         "seed = 11\n");
    return cfg.string();
}

/// Two-agent exchange network with per-agent parameters that acquire
/// sigma2_0 = 0.1 each (a = 1, b = 1, r = 100).
std::string exchange_config(const fs::path& dir, double theta, int horizon, long replicates) {
    Eigen::MatrixXd w(2, 2);
    w << 0.0, 1.0, 1.0, 0.0;
    save_network(validate_network(w), (dir / "exchange.txt").string());
    spit(dir / "params.txt", "1 1 100\n1 1 100\n");
    const fs::path cfg = dir / "exchange.ini";
    std::ostringstream body;
    body << "[network]\nfile = " << (dir / "exchange.txt").string() << "\n\n"
         << "[agents]\nmode = per_agent\nparams_file = " << (dir / "params.txt").string()
         << "\n\n"
         << "[sim]\ntheta = " << theta << "\nhorizon = " << horizon
         << "\nreplicates = " << replicates << "\nseed = 21\n";
    spit(cfg, body.str());
    return cfg.string();
}

}  // namespace

TEST_CASE("generate writes a valid connected scale-free network") {
    const fs::path dir = scratch("generate_ba");
    const fs::path net_path = dir / "net.txt";
    const RunResult r =
        run_cli(dir, "generate --kind ba --n 30 --m 3 --seed 7 --out " + net_path.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote") != std::string::npos);
    const Network net = load_network(net_path.string());
    CHECK(net.size() == 30);
    CHECK(oracle::weakly_connected(net.weights()));

    const RunResult again =
        run_cli(dir, "generate --kind ba --n 30 --m 3 --seed 7 --out " + (dir / "net2.txt").string());
    CHECK(again.code == 0);
    CHECK(slurp(net_path) == slurp(dir / "net2.txt"));
}

TEST_CASE("generate covers the other families and rejects bad specs") {
    const fs::path dir = scratch("generate_misc");
    CHECK(run_cli(dir, "generate --kind complete --n 4 --out " + (dir / "c.txt").string()).code ==
          0);
    const Network complete = load_network((dir / "c.txt").string());
    CHECK(complete.weights()(0, 1) == 1.0 / 3.0);
    CHECK(complete.weights()(2, 2) == 0.0);

    CHECK(run_cli(dir, "generate --kind ring --n 6 --k 2 --out " + (dir / "r.txt").string()).code ==
          0);
    const Network ring = load_network((dir / "r.txt").string());
    CHECK(ring.weights()(0, 2) == 0.25);
    CHECK(ring.weights().row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));

    const RunResult bad =
        run_cli(dir, "generate --kind ba --n 3 --m 3 --out " + (dir / "bad.txt").string());
    CHECK(bad.code == 2);
    CHECK(bad.err.find("error:") != std::string::npos);

    CHECK(run_cli(dir, "generate --kind banana --n 4 --out " + (dir / "x.txt").string()).code == 2);
}

TEST_CASE("simulate produces unbiased moment summaries") {
    const fs::path dir = scratch("simulate_small");
    const std::string cfg = small_config(dir);
    const fs::path moments = dir / "moments.csv";
    const RunResult r = run_cli(dir, "simulate -c " + cfg + " -o " + moments.string());
    CHECK(r.code == 0);

    const Ensemble ens = read_moment_csv(moments.string());
    CHECK(ens.n == 5);
    CHECK(ens.steps == 5);
    CHECK(ens.replicates == 2000);
    for (int t = 0; t <= ens.steps; ++t) {
        for (int i = 0; i < ens.n; ++i) {
            const double se = std::sqrt(ens.var_s(t, i) / static_cast<double>(ens.replicates));
            CHECK(std::abs(ens.mean_s(t, i) - 0.6) <= 4.5 * se);
        }
    }
    // acquired variance for a = b = 1, r = 20 is 20^(-1/2), and it shrinks
    for (int i = 0; i < ens.n; ++i) {
        CHECK(ens.sigma2(0, i) == doctest::Approx(std::pow(20.0, -0.5)).epsilon(1e-12));
        for (int t = 1; t <= ens.steps; ++t) CHECK(ens.sigma2(t, i) < ens.sigma2(t - 1, i));
    }
}

TEST_CASE("simulate with one replicate and horizon zero degenerates cleanly") {
    const fs::path dir = scratch("simulate_degenerate");
    const fs::path cfg = dir / "run.ini";
    spit(cfg,
         "[network]\nkind = complete\nn = 3\n\n"
         "[agents]\nmode = homogeneous\na = 1\nb = 1\nr = 20\n\n"
         "[sim]\ntheta = 0.4\nhorizon = 0\nreplicates = 1\nseed = 1\n");
    const fs::path moments = dir / "m.csv";
    CHECK(run_cli(dir, "simulate -c " + cfg.string() + " -o " + moments.string()).code == 0);
    const Ensemble ens = read_moment_csv(moments.string());
    CHECK(ens.steps == 0);
    CHECK(ens.replicates == 1);
    CHECK(ens.var_s == Eigen::MatrixXd::Zero(1, 3));
    CHECK(ens.mean_pi == Eigen::MatrixXd::Constant(1, 3, 0.4));
}

TEST_CASE("simulate output is byte-identical across runs and worker counts") {
    const fs::path dir = scratch("simulate_determinism");
    const std::string cfg = small_config(dir);
    const RunResult r1 =
        run_cli(dir, "simulate -c " + cfg + " -o " + (dir / "a.csv").string() + " --workers 1");
    const RunResult r2 =
        run_cli(dir, "simulate -c " + cfg + " -o " + (dir / "b.csv").string() + " --workers 1");
    const RunResult r4 =
        run_cli(dir, "simulate -c " + cfg + " -o " + (dir / "c.csv").string() + " --workers 4");
    CHECK(r1.code == 0);
    CHECK(r2.code == 0);
    CHECK(r4.code == 0);
    const std::string a = slurp(dir / "a.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a == slurp(dir / "c.csv"));
}

TEST_CASE("simulate records trajectories and histograms on request") {
    const fs::path dir = scratch("simulate_records");
    const fs::path cfg = dir / "run.ini";
    spit(cfg,
         "[network]\nkind = complete\nn = 3\n\n"
         "[agents]\nmode = homogeneous\na = 1\nb = 1\nr = 20\n\n"
         "[sim]\ntheta = 0.6\nhorizon = 2\nreplicates = 50\nseed = 4\n");
    const fs::path traj = dir / "traj.csv";
    const fs::path hist = dir / "hist.csv";
    const RunResult r = run_cli(dir, "simulate -c " + cfg.string() + " -o " +
                                         (dir / "m.csv").string() + " --trajectories " +
                                         traj.string() + " --histogram 0,2 --histograms " +
                                         hist.string());
    CHECK(r.code == 0);

    const std::string traj_text = slurp(traj);
    CHECK(traj_text.rfind("# beliefnet-trajectories", 0) == 0);
    CHECK(traj_text.find("replicate,t,agent,signal,mean,variance") != std::string::npos);
    const long lines = std::count(traj_text.begin(), traj_text.end(), '\n');
    CHECK(lines == 2 + 50 * 3 * 3);

    const std::string hist_text = slurp(hist);
    CHECK(hist_text.rfind("# beliefnet-histograms", 0) == 0);
    CHECK(hist_text.find("t,agent,bin_lo,count") != std::string::npos);
    long total_t0 = 0;
    std::istringstream rows(hist_text);
    std::string line;
    while (std::getline(rows, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::istringstream cells(line);
        std::string t_cell, agent_cell, lo_cell, count_cell;
        std::getline(cells, t_cell, ',');
        std::getline(cells, agent_cell, ',');
        std::getline(cells, lo_cell, ',');
        std::getline(cells, count_cell, ',');
        if (t_cell == "0") total_t0 += std::stol(count_cell);
    }
    CHECK(total_t0 == 50 * 3);
}

TEST_CASE("simulate creates the configured output directory") {
    const fs::path dir = scratch("simulate_outdir");
    const fs::path out_dir = dir / "results" / "run1";
    const fs::path cfg = dir / "run.ini";
    spit(cfg,
         "[network]\nkind = complete\nn = 3\n\n"
         "[agents]\nmode = homogeneous\na = 1\nb = 1\nr = 20\n\n"
         "[sim]\ntheta = 0.6\nhorizon = 2\nreplicates = 50\nseed = 4\n\n"
         "[output]\ndir = " +
             out_dir.string() + "\n");
    CHECK(run_cli(dir, "simulate -c " + cfg.string()).code == 0);
    CHECK(fs::exists(out_dir / "moments.csv"));
    CHECK(run_cli(dir, "analyze -c " + cfg.string()).code == 0);
    CHECK(fs::exists(out_dir / "analytic.csv"));
}

TEST_CASE("analyze writes the closed-form moment grid") {
    const fs::path dir = scratch("analyze");
    const std::string cfg = exchange_config(dir, 0.6, 3, 100);
    const fs::path out = dir / "analytic.csv";
    CHECK(run_cli(dir, "analyze -c " + cfg + " -o " + out.string()).code == 0);

    const MomentTrajectory traj = read_analytic_csv(out.string());
    CHECK(traj.theta == 0.6);
    CHECK(traj.steps == 3);
    CHECK(traj.var_exact(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(traj.var_exact(1, 0) == doctest::Approx(0.075).epsilon(1e-12));
    CHECK(traj.var_exact(1, 1) == doctest::Approx(0.075).epsilon(1e-12));
    CHECK(traj.band_lo(0, 0) == doctest::Approx(0.6 - 3.0 * std::sqrt(0.1)).epsilon(1e-12));
    CHECK(traj.band_hi(0, 0) == doctest::Approx(0.6 + 3.0 * std::sqrt(0.1)).epsilon(1e-12));
}

TEST_CASE("a simulation agrees with its own analytic moments") {
    const fs::path dir = scratch("compare_ok");
    const std::string cfg = exchange_config(dir, 0.6, 5, 10000);
    const fs::path analytic = dir / "analytic.csv";
    const fs::path moments = dir / "moments.csv";
    const fs::path coverage = dir / "coverage.csv";

    CHECK(run_cli(dir, "analyze -c " + cfg + " -o " + analytic.string()).code == 0);
    const RunResult sim =
        run_cli(dir, "simulate -c " + cfg + " -o " + moments.string() + " --bands " +
                         analytic.string() + " --coverage " + coverage.string());
    CHECK(sim.code == 0);
    CHECK(fs::exists(coverage));

    const RunResult cmp = run_cli(dir, "compare " + moments.string() + " " + analytic.string() +
                                           " --coverage " + coverage.string() + " --report " +
                                           (dir / "report.txt").string());
    CHECK(cmp.code == 0);
    CHECK(cmp.out.find("comparison passed") != std::string::npos);
    const std::string report = slurp(dir / "report.txt");
    CHECK(report.find("# max_abs_z") != std::string::npos);
    CHECK(report.find("# min_coverage") != std::string::npos);
}

TEST_CASE("compare flags a simulation run at the wrong theta") {
    const fs::path dir = scratch("compare_bad_theta");
    const std::string cfg_good = exchange_config(dir, 0.6, 5, 10000);
    const fs::path analytic = dir / "analytic.csv";
    CHECK(run_cli(dir, "analyze -c " + cfg_good + " -o " + analytic.string()).code == 0);

    const fs::path dir_bad = scratch("compare_bad_theta_sim");
    const std::string cfg_bad = exchange_config(dir_bad, 0.9, 5, 10000);
    const fs::path moments = dir_bad / "moments.csv";
    CHECK(run_cli(dir_bad, "simulate -c " + cfg_bad + " -o " + moments.string()).code == 0);

    const RunResult cmp = run_cli(dir, "compare " + moments.string() + " " + analytic.string());
    CHECK(cmp.code == 4);
    CHECK(cmp.err.find("comparison failed") != std::string::npos);
}

TEST_CASE("mismatched grids and bands are configuration errors") {
    const fs::path dir = scratch("compare_shape");
    const std::string cfg = exchange_config(dir, 0.6, 5, 200);
    const fs::path moments = dir / "moments.csv";
    CHECK(run_cli(dir, "simulate -c " + cfg + " -o " + moments.string()).code == 0);

    const fs::path dir_short = scratch("compare_shape_short");
    const std::string cfg_short = exchange_config(dir_short, 0.6, 2, 200);
    const fs::path analytic_short = dir_short / "analytic.csv";
    CHECK(run_cli(dir_short, "analyze -c " + cfg_short + " -o " + analytic_short.string()).code ==
          0);

    const RunResult cmp =
        run_cli(dir, "compare " + moments.string() + " " + analytic_short.string());
    CHECK(cmp.code == 2);

    // simulate refuses bands computed for a different theta
    const fs::path dir_other = scratch("compare_shape_theta");
    const std::string cfg_other = exchange_config(dir_other, 0.9, 5, 200);
    const fs::path analytic_other = dir_other / "analytic.csv";
    CHECK(run_cli(dir_other, "analyze -c " + cfg_other + " -o " + analytic_other.string()).code ==
          0);
    const RunResult sim = run_cli(dir, "simulate -c " + cfg + " -o " + (dir / "m2.csv").string() +
                                           " --bands " + analytic_other.string());
    CHECK(sim.code == 2);
    CHECK(sim.err.find("theta") != std::string::npos);
}

TEST_CASE("fit recovers cost parameters and prices reward conditions") {
    const fs::path dir = scratch("fit");
    std::ostringstream cost;
    cost << "cost,variance,count\n";
    for (double v : {0.01, 0.02, 0.04, 0.08, 0.16})
        cost << sig17(2.0 * std::pow(v, -0.5)) << "," << sig17(v) << ",10\n";
    spit(dir / "cost.csv", cost.str());

    const fs::path fit_out = dir / "fit.txt";
    const RunResult fit = run_cli(dir, "fit " + (dir / "cost.csv").string() +
                                           " --mode cost --out " + fit_out.string());
    CHECK(fit.code == 0);
    std::istringstream report(slurp(fit_out));
    std::string key;
    double a = 0.0, b = 0.0;
    report >> key >> a;
    CHECK(key == "a");
    report >> key >> b;
    CHECK(key == "b");
    CHECK(oracle::rel_err(a, 2.0) < 1e-9);
    CHECK(oracle::rel_err(b, 0.5) < 1e-9);

    std::ostringstream reward;
    reward << "reward,variance\n";
    for (double r : {0.5, 2.0, 8.0})
        reward << sig17(r) << "," << sig17(predict_variance(r, 2.0, 0.5)) << "\n";
    spit(dir / "reward.csv", reward.str());

    const fs::path pred_out = dir / "pred.csv";
    const RunResult pred = run_cli(dir, "fit " + (dir / "reward.csv").string() +
                                            " --mode reward --a 2 --b 0.5 --out " +
                                            pred_out.string());
    CHECK(pred.code == 0);
    std::istringstream lines(slurp(pred_out));
    std::string line;
    std::getline(lines, line);
    CHECK(line == "reward,variance,r,predicted_variance");
    int rows = 0;
    while (std::getline(lines, line)) {
        std::istringstream cells(line);
        std::string cell;
        double cols[4] = {};
        for (double& c : cols) {
            std::getline(cells, cell, ',');
            c = std::stod(cell);
        }
        CHECK(oracle::rel_err(cols[2], cols[0]) < 1e-9);
        CHECK(oracle::rel_err(cols[3], cols[1]) < 1e-9);
        ++rows;
    }
    CHECK(rows == 3);
}

TEST_CASE("fit rejects unusable inputs") {
    const fs::path dir = scratch("fit_errors");
    spit(dir / "empty.csv", "cost,variance,count\n");
    CHECK(run_cli(dir, "fit " + (dir / "empty.csv").string() + " --mode cost").code == 2);

    spit(dir / "reward.csv", "reward,variance\n1,0.5\n");
    const RunResult no_ab = run_cli(dir, "fit " + (dir / "reward.csv").string() + " --mode reward");
    CHECK(no_ab.code == 2);
    CHECK(no_ab.err.find("--a") != std::string::npos);

    CHECK(run_cli(dir, "fit " + (dir / "reward.csv").string() + " --mode banana").code == 2);
}

TEST_CASE("top-level argument handling") {
    const fs::path dir = scratch("toplevel");
    CHECK(run_cli(dir, "--help").code == 0);
    CHECK(run_cli(dir, "").code == 2);
    CHECK(run_cli(dir, "simulate -c " + (dir / "missing.ini").string()).code == 2);

    const std::string cfg = small_config(dir);
    const RunResult bad_env =
        run_cli(dir, "simulate -c " + cfg + " -o " + (dir / "m.csv").string(),
                "BELIEFNET_THREADS=banana");
    CHECK(bad_env.code == 2);
    CHECK(bad_env.err.find("BELIEFNET_THREADS") != std::string::npos);
}

TEST_CASE("config files with typos are rejected with positions") {
    const fs::path dir = scratch("config_errors");
    const fs::path cfg = dir / "bad.ini";
    spit(cfg,
         "[network]\nkind = complete\nn = 4\n\n"
         "[agents]\nmode = homogeneous\na = 1\nb = 1\nr = 20\nextra = 1\n\n"
         "[sim]\ntheta = 0.6\nhorizon = 1\nreplicates = 10\n");
    const RunResult r = run_cli(dir, "simulate -c " + cfg.string() + " -o " +
                                         (dir / "m.csv").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("agents.extra") != std::string::npos);
}
