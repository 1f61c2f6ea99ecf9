#include "beliefnet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace beliefnet {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;  // "init"

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    long line_no = 0;
    bool used = false;
};

/// Parsed key = value entries, one map per section.
class IniFile {
public:
    explicit IniFile(const std::string& path) : path_(path) {
        std::ifstream is(path);
        if (!is) throw IoError("cannot open " + path + " for reading");
        std::string line, section;
        long line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            const std::size_t comment = line.find_first_of("#;");
            if (comment != std::string::npos) line.erase(comment);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError("unterminated section header '" + line + "'", line_no);
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ParseError("empty section name", line_no);
                sections_[section];
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("expected key = value, got '" + line + "'", line_no);
            if (section.empty())
                throw ParseError("key '" + trim(line.substr(0, eq)) + "' outside any section",
                                 line_no);
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ParseError("empty key", line_no);
            auto [it, inserted] = sections_[section].emplace(
                key, Entry{trim(line.substr(eq + 1)), line_no, false});
            if (!inserted)
                throw ParseError("duplicate key '" + key + "' in [" + section + "]", line_no);
        }
        if (is.bad()) throw IoError("read from " + path + " failed");
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    const Entry* find(const std::string& section, const std::string& key) {
        const auto sit = sections_.find(section);
        if (sit == sections_.end()) return nullptr;
        const auto kit = sit->second.find(key);
        if (kit == sit->second.end()) return nullptr;
        kit->second.used = true;
        return &kit->second;
    }

    const Entry& need(const std::string& section, const std::string& key) {
        const Entry* e = find(section, key);
        if (!e) throw ConfigError("missing " + section + "." + key + " in " + path_);
        return *e;
    }

    /// Every key must have been consumed by the schema; leftovers are
    /// almost always typos.
    void reject_unused() const {
        for (const auto& [section, keys] : sections_)
            for (const auto& [key, entry] : keys)
                if (!entry.used)
                    throw ConfigError("unknown key " + section + "." + key + " (line " +
                                      std::to_string(entry.line_no) + ")");
    }

private:
    std::string path_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

double to_double(const Entry& e, const std::string& what) {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end)
        throw ParseError(what + ": bad number '" + e.value + "'", e.line_no);
    return v;
}

template <typename Int>
Int to_int(const Entry& e, const std::string& what) {
    Int v = 0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    const auto [p, ec] = std::from_chars(b, end, v);
    if (ec != std::errc() || p != end)
        throw ParseError(what + ": bad integer '" + e.value + "'", e.line_no);
    return v;
}

GraphKind to_kind(const Entry& e) {
    if (e.value == "ba" || e.value == "barabasi_albert") return GraphKind::barabasi_albert;
    if (e.value == "complete") return GraphKind::complete;
    if (e.value == "ring") return GraphKind::ring;
    throw ParseError("unknown network kind '" + e.value + "' (ba, complete, ring)", e.line_no);
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    IniFile ini(path);
    RunConfig cfg;

    const Entry* file = ini.find("network", "file");
    const Entry* kind = ini.find("network", "kind");
    if (file && kind)
        throw ConfigError("network.file and network.kind are mutually exclusive");
    if (file) {
        cfg.graph.kind = GraphKind::custom_file;
        cfg.graph.file = file->value;
    } else if (kind) {
        cfg.graph.kind = to_kind(*kind);
        cfg.graph.n = to_int<int>(ini.need("network", "n"), "network.n");
        if (const Entry* m = ini.find("network", "m"))
            cfg.graph.m = to_int<int>(*m, "network.m");
        if (const Entry* k = ini.find("network", "k"))
            cfg.graph.k = to_int<int>(*k, "network.k");
        if (const Entry* seed = ini.find("network", "seed"))
            cfg.graph.seed = to_int<std::uint64_t>(*seed, "network.seed");
    } else {
        throw ConfigError("[network] needs either kind or file");
    }

    const Entry& mode = ini.need("agents", "mode");
    if (mode.value == "uniform_variance") {
        cfg.agents.mode = AgentMode::uniform_variance;
        cfg.agents.sigma2_min = to_double(ini.need("agents", "sigma2_min"), "agents.sigma2_min");
        cfg.agents.sigma2_max = to_double(ini.need("agents", "sigma2_max"), "agents.sigma2_max");
        if (!(cfg.agents.sigma2_min > 0) || !std::isfinite(cfg.agents.sigma2_max) ||
            cfg.agents.sigma2_max < cfg.agents.sigma2_min)
            throw ConfigError("agents.sigma2_min/max must satisfy 0 < min <= max");
    } else if (mode.value == "homogeneous") {
        cfg.agents.mode = AgentMode::homogeneous;
        cfg.agents.shared.a = to_double(ini.need("agents", "a"), "agents.a");
        cfg.agents.shared.b = to_double(ini.need("agents", "b"), "agents.b");
        cfg.agents.shared.r = to_double(ini.need("agents", "r"), "agents.r");
        validate_params(cfg.agents.shared);
    } else if (mode.value == "per_agent") {
        cfg.agents.mode = AgentMode::per_agent;
        cfg.agents.params_file = ini.need("agents", "params_file").value;
    } else {
        throw ParseError("unknown agents.mode '" + mode.value +
                             "' (uniform_variance, homogeneous, per_agent)",
                         mode.line_no);
    }

    cfg.sim.theta = to_double(ini.need("sim", "theta"), "sim.theta");
    cfg.sim.horizon = to_int<int>(ini.need("sim", "horizon"), "sim.horizon");
    cfg.sim.replicates = to_int<std::int64_t>(ini.need("sim", "replicates"), "sim.replicates");
    if (const Entry* seed = ini.find("sim", "seed"))
        cfg.sim.seed = to_int<std::uint64_t>(*seed, "sim.seed");
    if (const Entry* tol = ini.find("sim", "convergence_tol")) {
        const double v = to_double(*tol, "sim.convergence_tol");
        if (!(v > 0)) throw ConfigError("sim.convergence_tol must be > 0");
        cfg.sim.convergence_tol = v;
    }
    if (!std::isfinite(cfg.sim.theta)) throw ConfigError("sim.theta must be finite");
    if (cfg.sim.horizon < 0) throw ConfigError("sim.horizon must be >= 0");
    if (cfg.sim.replicates < 1) throw ConfigError("sim.replicates must be >= 1");

    if (const Entry* dir = ini.find("output", "dir")) cfg.output.dir = dir->value;
    if (const Entry* e = ini.find("output", "moments")) cfg.output.moments = e->value;
    if (const Entry* e = ini.find("output", "analytic")) cfg.output.analytic = e->value;
    if (const Entry* e = ini.find("output", "trajectories")) cfg.output.trajectories = e->value;
    if (const Entry* e = ini.find("output", "histograms")) cfg.output.histograms = e->value;
    if (const Entry* e = ini.find("output", "coverage")) cfg.output.coverage = e->value;
    if (!cfg.output.trajectories.empty()) cfg.sim.record = series::all;

    ini.reject_unused();
    return cfg;
}

Network build_network(const RunConfig& cfg) { return generate(cfg.graph); }

InitialBeliefs build_initial_beliefs(const RunConfig& cfg, int n) {
    switch (cfg.agents.mode) {
        case AgentMode::uniform_variance: {
            Rng rng(stream_seed(cfg.sim.seed, kInitStream));
            std::uniform_real_distribution<double> draw(cfg.agents.sigma2_min,
                                                        cfg.agents.sigma2_max);
            InitialBeliefs init;
            init.theta = cfg.sim.theta;
            init.variances.resize(n);
            for (int i = 0; i < n; ++i) init.variances[i] = draw(rng);
            return init;
        }
        case AgentMode::homogeneous:
            return form_initial_beliefs(std::vector<RiParams>(n, cfg.agents.shared),
                                        cfg.sim.theta);
        case AgentMode::per_agent: {
            std::ifstream is(cfg.agents.params_file);
            if (!is) throw IoError("cannot open " + cfg.agents.params_file + " for reading");
            std::vector<RiParams> params;
            std::string line;
            long line_no = 0;
            while (std::getline(is, line)) {
                ++line_no;
                const std::size_t comment = line.find('#');
                if (comment != std::string::npos) line.erase(comment);
                if (trim(line).empty()) continue;
                std::istringstream row(line);
                RiParams p;
                std::string extra;
                if (!(row >> p.a >> p.b >> p.r))
                    throw ParseError("expected 'a b r'", line_no);
                if (row >> extra) throw ParseError("trailing token '" + extra + "'", line_no);
                params.push_back(p);
            }
            if (static_cast<int>(params.size()) != n)
                throw ConfigError(cfg.agents.params_file + " lists " +
                                  std::to_string(params.size()) + " agents, network has " +
                                  std::to_string(n));
            return form_initial_beliefs(params, cfg.sim.theta);
        }
    }
    throw ConfigError("unknown agent mode");
}

}  // namespace beliefnet
