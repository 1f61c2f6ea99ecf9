#include "beliefnet/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace beliefnet {

namespace {

constexpr const char* kMomentHeader = "t,agent,mean_s,var_s,mean_pi,var_pi,sigma2";
constexpr const char* kAnalyticHeader = "t,agent,mean,var_exact,var_eq8,sigma2,band_lo,band_hi";
constexpr const char* kCoverageHeader = "t,agent,inside,total";
constexpr const char* kTrajectoryHeader = "replicate,t,agent,signal,mean,variance";
constexpr const char* kHistogramHeader = "t,agent,bin_lo,count";
constexpr const char* kCostHeader = "cost,variance,count";
constexpr const char* kRewardHeader = "reward,variance";

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path + " for reading");
    return is;
}

void finish_out(std::ofstream& os, const std::string& path) {
    os.flush();
    if (!os) throw IoError("write to " + path + " failed");
}

using KvList = std::vector<std::pair<std::string, std::string>>;

void write_pragma(std::ostream& os, const std::string& kind, const KvList& kv) {
    os << "# beliefnet-" << kind << " v1";
    for (const auto& [key, value] : kv) os << " " << key << "=" << value;
    os << "\n";
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(const std::string& tok, long line_no) {
    double v = 0.0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ParseError("bad number '" + tok + "'", line_no);
    return v;
}

template <typename Int>
Int parse_int(const std::string& tok, long line_no) {
    Int v = 0;
    const char* b = tok.data();
    const char* e = b + tok.size();
    const auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ParseError("bad integer '" + tok + "'", line_no);
    return v;
}

struct Pragma {
    std::map<std::string, std::string> kv;
    long line_no = 1;

    const std::string& need(const std::string& key) const {
        const auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("pragma is missing " + key, line_no);
        return it->second;
    }
};

Pragma parse_pragma(const std::string& line, const std::string& kind) {
    const std::vector<std::string> tokens = split(line, ' ');
    if (tokens.size() < 3 || tokens[0] != "#" || tokens[1] != "beliefnet-" + kind)
        throw ParseError("not a beliefnet " + kind + " CSV (pragma line missing)", 1);
    if (tokens[2] != "v1") throw ParseError("unsupported version '" + tokens[2] + "'", 1);
    Pragma pragma;
    for (std::size_t i = 3; i < tokens.size(); ++i) {
        const std::size_t eq = tokens[i].find('=');
        if (eq == std::string::npos)
            throw ParseError("malformed pragma token '" + tokens[i] + "'", 1);
        pragma.kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    return pragma;
}

/// Reads the pragma and header, then hands each data row (already split
/// on commas and width-checked) to `row`. Blank lines and later `#` lines
/// are skipped.
template <typename RowFn>
void read_rows(std::istream& is, const std::string& path, const std::string& kind,
               const char* header, std::size_t width, Pragma& pragma, RowFn row) {
    std::string line;
    long line_no = 0;

    if (!std::getline(is, line)) throw ParseError("empty file " + path, 1);
    ++line_no;
    pragma = parse_pragma(line, kind);

    if (!std::getline(is, line)) throw ParseError("missing header row", 2);
    ++line_no;
    if (line != header)
        throw ParseError("header '" + line + "' does not match '" + header + "'", line_no);

    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        row(fields, line_no);
    }
    if (is.bad()) throw IoError("read from " + path + " failed");
}

/// Tracks which (t, agent) cells of a fixed grid have been filled.
class GridCheck {
public:
    GridCheck(int rows, int n) : rows_(rows), n_(n), seen_(rows * n, false) {}

    void mark(int t, int agent, long line_no) {
        if (t < 0 || t >= rows_)
            throw ParseError("t=" + std::to_string(t) + " outside 0.." + std::to_string(rows_ - 1),
                             line_no);
        if (agent < 0 || agent >= n_)
            throw ParseError("agent=" + std::to_string(agent) + " outside 0.." +
                                 std::to_string(n_ - 1),
                             line_no);
        std::vector<bool>::reference cell = seen_[static_cast<std::size_t>(t) * n_ + agent];
        if (cell)
            throw ParseError("duplicate cell t=" + std::to_string(t) + " agent=" +
                                 std::to_string(agent),
                             line_no);
        cell = true;
    }

    void require_complete(long last_line) const {
        long missing = 0;
        for (bool s : seen_)
            if (!s) ++missing;
        if (missing > 0)
            throw ParseError("grid incomplete: " + std::to_string(missing) + " of " +
                                 std::to_string(seen_.size()) + " cells missing",
                             last_line);
    }

private:
    int rows_, n_;
    std::vector<bool> seen_;
};

KvList run_kv(int n, int horizon, std::int64_t replicates, double theta, std::uint64_t seed) {
    return {{"n", std::to_string(n)},
            {"horizon", std::to_string(horizon)},
            {"replicates", std::to_string(replicates)},
            {"theta", sig17(theta)},
            {"seed", std::to_string(seed)}};
}

}  // namespace

void write_moment_csv(const std::string& path, const Ensemble& ensemble) {
    std::ofstream os = open_out(path);
    write_pragma(os, "moments",
                 run_kv(ensemble.n, ensemble.steps, ensemble.replicates, ensemble.config.theta,
                        ensemble.config.seed));
    os << kMomentHeader << "\n";
    for (int t = 0; t <= ensemble.steps; ++t)
        for (int i = 0; i < ensemble.n; ++i)
            os << t << "," << i << "," << sig17(ensemble.mean_s(t, i)) << ","
               << sig17(ensemble.var_s(t, i)) << "," << sig17(ensemble.mean_pi(t, i)) << ","
               << sig17(ensemble.var_pi(t, i)) << "," << sig17(ensemble.sigma2(t, i)) << "\n";
    finish_out(os, path);
}

Ensemble read_moment_csv(const std::string& path) {
    std::ifstream is = open_in(path);
    Pragma pragma;
    Ensemble out;
    long last_line = 2;

    // sizes come from the pragma, so the grid can be preallocated; the
    // row loop then only fills and checks cells
    std::string first;
    if (!std::getline(is, first)) throw ParseError("empty file " + path, 1);
    pragma = parse_pragma(first, "moments");
    out.n = parse_int<int>(pragma.need("n"), 1);
    out.steps = parse_int<int>(pragma.need("horizon"), 1);
    out.replicates = parse_int<std::int64_t>(pragma.need("replicates"), 1);
    out.config.theta = parse_double(pragma.need("theta"), 1);
    out.config.seed = parse_int<std::uint64_t>(pragma.need("seed"), 1);
    if (out.n < 1 || out.steps < 0 || out.replicates < 1)
        throw ParseError("pragma sizes out of range", 1);
    out.config.horizon = out.steps;
    out.config.replicates = out.replicates;

    const int rows = out.steps + 1;
    out.mean_s.resize(rows, out.n);
    out.var_s.resize(rows, out.n);
    out.mean_pi.resize(rows, out.n);
    out.var_pi.resize(rows, out.n);
    out.sigma2.resize(rows, out.n);
    out.in_band = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, out.n);
    GridCheck grid(rows, out.n);

    is.seekg(0);
    read_rows(is, path, "moments", kMomentHeader, 7, pragma,
              [&](const std::vector<std::string>& f, long line_no) {
                  const int t = parse_int<int>(f[0], line_no);
                  const int agent = parse_int<int>(f[1], line_no);
                  grid.mark(t, agent, line_no);
                  out.mean_s(t, agent) = parse_double(f[2], line_no);
                  out.var_s(t, agent) = parse_double(f[3], line_no);
                  out.mean_pi(t, agent) = parse_double(f[4], line_no);
                  out.var_pi(t, agent) = parse_double(f[5], line_no);
                  out.sigma2(t, agent) = parse_double(f[6], line_no);
                  last_line = line_no;
              });
    grid.require_complete(last_line);
    return out;
}

void write_analytic_csv(const std::string& path, const MomentTrajectory& traj) {
    const int n = static_cast<int>(traj.var_exact.cols());
    std::ofstream os = open_out(path);
    write_pragma(os, "analytic",
                 {{"n", std::to_string(n)},
                  {"horizon", std::to_string(traj.steps)},
                  {"theta", sig17(traj.theta)}});
    os << kAnalyticHeader << "\n";
    for (int t = 0; t <= traj.steps; ++t)
        for (int i = 0; i < n; ++i)
            os << t << "," << i << "," << sig17(traj.theta) << "," << sig17(traj.var_exact(t, i))
               << "," << sig17(traj.var_eq8(t, i)) << "," << sig17(traj.sigma2(t, i)) << ","
               << sig17(traj.band_lo(t, i)) << "," << sig17(traj.band_hi(t, i)) << "\n";
    finish_out(os, path);
}

MomentTrajectory read_analytic_csv(const std::string& path) {
    std::ifstream is = open_in(path);
    MomentTrajectory out;
    long last_line = 2;

    std::string first;
    if (!std::getline(is, first)) throw ParseError("empty file " + path, 1);
    Pragma pragma = parse_pragma(first, "analytic");
    const int n = parse_int<int>(pragma.need("n"), 1);
    out.steps = parse_int<int>(pragma.need("horizon"), 1);
    out.theta = parse_double(pragma.need("theta"), 1);
    if (n < 1 || out.steps < 0) throw ParseError("pragma sizes out of range", 1);

    const int rows = out.steps + 1;
    out.var_exact.resize(rows, n);
    out.var_eq8.resize(rows, n);
    out.sigma2.resize(rows, n);
    out.band_lo.resize(rows, n);
    out.band_hi.resize(rows, n);
    GridCheck grid(rows, n);

    is.seekg(0);
    read_rows(is, path, "analytic", kAnalyticHeader, 8, pragma,
              [&](const std::vector<std::string>& f, long line_no) {
                  const int t = parse_int<int>(f[0], line_no);
                  const int agent = parse_int<int>(f[1], line_no);
                  grid.mark(t, agent, line_no);
                  if (parse_double(f[2], line_no) != out.theta)
                      throw ParseError("mean column '" + f[2] + "' deviates from theta " +
                                           sig17(out.theta),
                                       line_no);
                  out.var_exact(t, agent) = parse_double(f[3], line_no);
                  out.var_eq8(t, agent) = parse_double(f[4], line_no);
                  out.sigma2(t, agent) = parse_double(f[5], line_no);
                  out.band_lo(t, agent) = parse_double(f[6], line_no);
                  out.band_hi(t, agent) = parse_double(f[7], line_no);
                  last_line = line_no;
              });
    grid.require_complete(last_line);
    return out;
}

void write_coverage_csv(const std::string& path, const Ensemble& ensemble) {
    if (!ensemble.has_coverage)
        throw ConfigError("coverage CSV requested but the run tracked no bands");
    std::ofstream os = open_out(path);
    write_pragma(os, "coverage",
                 run_kv(ensemble.n, ensemble.steps, ensemble.replicates, ensemble.config.theta,
                        ensemble.config.seed));
    os << kCoverageHeader << "\n";
    for (int t = 0; t <= ensemble.steps; ++t)
        for (int i = 0; i < ensemble.n; ++i)
            os << t << "," << i << "," << ensemble.in_band(t, i) << "," << ensemble.replicates
               << "\n";
    finish_out(os, path);
}

void read_coverage_csv(const std::string& path, Ensemble& ensemble) {
    std::ifstream is = open_in(path);
    long last_line = 2;

    std::string first;
    if (!std::getline(is, first)) throw ParseError("empty file " + path, 1);
    Pragma pragma = parse_pragma(first, "coverage");
    const auto check = [&](const std::string& key, const std::string& have) {
        const std::string& got = pragma.need(key);
        if (got != have)
            throw ProvenanceMismatch("coverage sidecar " + key + "=" + got +
                                     " does not match moments " + key + "=" + have);
    };
    check("n", std::to_string(ensemble.n));
    check("horizon", std::to_string(ensemble.steps));
    check("replicates", std::to_string(ensemble.replicates));
    check("theta", sig17(ensemble.config.theta));
    check("seed", std::to_string(ensemble.config.seed));

    const int rows = ensemble.steps + 1;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> in_band =
        Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(rows, ensemble.n);
    GridCheck grid(rows, ensemble.n);

    is.seekg(0);
    read_rows(is, path, "coverage", kCoverageHeader, 4, pragma,
              [&](const std::vector<std::string>& f, long line_no) {
                  const int t = parse_int<int>(f[0], line_no);
                  const int agent = parse_int<int>(f[1], line_no);
                  grid.mark(t, agent, line_no);
                  const std::int64_t inside = parse_int<std::int64_t>(f[2], line_no);
                  const std::int64_t total = parse_int<std::int64_t>(f[3], line_no);
                  if (total != ensemble.replicates)
                      throw ParseError("total " + std::to_string(total) + " does not match " +
                                           std::to_string(ensemble.replicates) + " replicates",
                                       line_no);
                  if (inside < 0 || inside > total)
                      throw ParseError("inside " + std::to_string(inside) + " outside 0.." +
                                           std::to_string(total),
                                       line_no);
                  in_band(t, agent) = inside;
                  last_line = line_no;
              });
    grid.require_complete(last_line);
    ensemble.in_band = std::move(in_band);
    ensemble.has_coverage = true;
}

void write_trajectory_csv(const std::string& path, const Ensemble& ensemble) {
    if (ensemble.traj_signals.empty() || ensemble.traj_means.empty() ||
        ensemble.traj_variances.empty())
        throw ConfigError("trajectory CSV needs signals, means and variances recorded");
    std::ofstream os = open_out(path);
    write_pragma(os, "trajectories",
                 run_kv(ensemble.n, ensemble.steps, ensemble.replicates, ensemble.config.theta,
                        ensemble.config.seed));
    os << kTrajectoryHeader << "\n";
    for (std::int64_t rep = 0; rep < ensemble.replicates; ++rep)
        for (int t = 0; t <= ensemble.steps; ++t)
            for (int i = 0; i < ensemble.n; ++i)
                os << rep << "," << t << "," << i << ","
                   << sig17(ensemble.traj_signals[rep](t, i)) << ","
                   << sig17(ensemble.traj_means[rep](t, i)) << ","
                   << sig17(ensemble.traj_variances[rep](t, i)) << "\n";
    finish_out(os, path);
}

void write_histogram_csv(const std::string& path, const Ensemble& ensemble) {
    std::ofstream os = open_out(path);
    KvList kv = run_kv(ensemble.n, ensemble.steps, ensemble.replicates, ensemble.config.theta,
                       ensemble.config.seed);
    kv.emplace_back("bin", sig17(kHistogramBinWidth));
    write_pragma(os, "histograms", kv);
    os << kHistogramHeader << "\n";
    for (const auto& [key, bins] : ensemble.histograms)
        for (const auto& [bin, count] : bins)
            os << key.first << "," << key.second << ","
               << sig17(static_cast<double>(bin) * kHistogramBinWidth) << "," << count << "\n";
    finish_out(os, path);
}

namespace {

/// Shared scaffolding for the hand-authored observation CSVs: header
/// required, `#` comments and blank lines allowed, no pragma.
template <typename RowFn>
void read_observation_rows(const std::string& path, const char* header, std::size_t width,
                           RowFn row) {
    std::ifstream is = open_in(path);
    std::string line;
    long line_no = 0;
    bool saw_header = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!saw_header) {
            if (line != header)
                throw ParseError("header '" + line + "' does not match '" + header + "'",
                                 line_no);
            saw_header = true;
            continue;
        }
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != width)
            throw ParseError("expected " + std::to_string(width) + " fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        row(fields, line_no);
    }
    if (is.bad()) throw IoError("read from " + path + " failed");
    if (!saw_header) throw ParseError("missing header row", line_no == 0 ? 1 : line_no);
}

}  // namespace

std::vector<CostObservation> read_cost_csv(const std::string& path) {
    std::vector<CostObservation> out;
    read_observation_rows(path, kCostHeader, 3,
                          [&](const std::vector<std::string>& f, long line_no) {
                              CostObservation o;
                              o.cost = parse_double(f[0], line_no);
                              o.variance = parse_double(f[1], line_no);
                              o.count = parse_int<long>(f[2], line_no);
                              if (!(o.cost > 0))
                                  throw ParseError("cost must be > 0, got " + f[0], line_no);
                              if (!(o.variance > 0))
                                  throw ParseError("variance must be > 0, got " + f[1], line_no);
                              if (o.count < 2)
                                  throw ParseError("count must be >= 2, got " + f[2], line_no);
                              out.push_back(o);
                          });
    return out;
}

std::vector<RewardObservation> read_reward_csv(const std::string& path) {
    std::vector<RewardObservation> out;
    read_observation_rows(path, kRewardHeader, 2,
                          [&](const std::vector<std::string>& f, long line_no) {
                              RewardObservation o;
                              o.reward = parse_double(f[0], line_no);
                              o.variance = parse_double(f[1], line_no);
                              if (!(o.reward > 0))
                                  throw ParseError("reward must be > 0, got " + f[0], line_no);
                              if (!(o.variance > 0))
                                  throw ParseError("variance must be > 0, got " + f[1], line_no);
                              out.push_back(o);
                          });
    return out;
}

}  // namespace beliefnet
