#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "beliefnet/network.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace beliefnet;

namespace {

Eigen::MatrixXd complete3() {
    Eigen::MatrixXd w(3, 3);
    w << 0, .5, .5, .5, 0, .5, .5, .5, 0;
    return w;
}

std::filesystem::path scratch_file(const std::string& name) {
    const auto dir = std::filesystem::path("test_scratch");
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_CASE("validate_network accepts a symmetric complete graph") {
    const Network net = validate_network(complete3());
    CHECK(net.size() == 3);
    CHECK(net.weight(0, 1) == 0.5);
    CHECK(net.weight(2, 2) == 0.0);
    CHECK_FALSE(net.self_loops_allowed());
}

TEST_CASE("validate_network flags a non-stochastic row with its sum") {
    Eigen::MatrixXd w = complete3();
    w.row(0) << 0, 0.6, 0.6;
    try {
        validate_network(w);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(e.violations().size() == 1);
        const Violation& v = e.violations()[0];
        CHECK(v.kind == Violation::Kind::NonStochasticRow);
        CHECK(v.row == 0);
        CHECK(v.value == doctest::Approx(1.2));
    }
}

TEST_CASE("validate_network rejects the identity unless self loops are allowed") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
    try {
        validate_network(eye);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        REQUIRE(e.violations().size() == 4);
        for (int i = 0; i < 4; ++i) {
            CHECK(e.violations()[i].kind == Violation::Kind::SelfLoop);
            CHECK(e.violations()[i].row == i);
        }
    }

    const Network net = validate_network(eye, true);
    CHECK(net.self_loops_allowed());
    CHECK(net.weight(2, 2) == 1.0);
}

TEST_CASE("check_weights reports every violation, not just the first") {
    Eigen::MatrixXd w = complete3();
    w(0, 1) = -0.5;            // negative entry, row 0 also non-stochastic
    w.row(2).setZero();        // isolated and non-stochastic
    const auto violations = check_weights(w);

    int negative = 0, nonstochastic = 0, isolated = 0;
    for (const auto& v : violations) {
        if (v.kind == Violation::Kind::NegativeWeight) ++negative;
        if (v.kind == Violation::Kind::NonStochasticRow) ++nonstochastic;
        if (v.kind == Violation::Kind::IsolatedRow) ++isolated;
    }
    CHECK(negative == 1);
    CHECK(nonstochastic == 2);
    CHECK(isolated == 1);
}

TEST_CASE("validate_network requires a square matrix") {
    CHECK_THROWS_AS(validate_network(Eigen::MatrixXd::Zero(2, 3)), DimensionMismatch);
}

TEST_CASE("generate complete n=4 gives uniform off-diagonal thirds") {
    const Network net = fixtures::complete_net(4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            CHECK(net.weight(i, j) == (i == j ? 0.0 : 1.0 / 3.0));
        }
    }
}

TEST_CASE("generate ring n=6 k=1 weights both nearest neighbors 0.5") {
    const Network net = fixtures::ring_net(6, 1);
    for (int i = 0; i < 6; ++i) {
        int halves = 0;
        for (int j = 0; j < 6; ++j) {
            if (net.weight(i, j) == 0.5) ++halves;
            else CHECK(net.weight(i, j) == 0.0);
        }
        CHECK(halves == 2);
        CHECK(net.weight(i, (i + 1) % 6) == 0.5);
        CHECK(net.weight(i, (i + 5) % 6) == 0.5);
    }
}

TEST_CASE("generate barabasi-albert is valid, connected, and deterministic") {
    GraphSpec spec;
    spec.kind = GraphKind::barabasi_albert;
    spec.n = 100;
    spec.m = 3;
    spec.seed = 42;

    const Network net = generate(spec);
    CHECK(check_weights(net.weights()).empty());
    CHECK(oracle::weakly_connected(net.weights()));

    const Network again = generate(spec);
    CHECK(net.weights() == again.weights());
}

TEST_CASE("generated networks have row sums within 1e-9") {
    GraphSpec ba;
    ba.kind = GraphKind::barabasi_albert;
    ba.n = 60;
    ba.m = 2;
    ba.seed = 7;
    for (const Network& net : {fixtures::complete_net(9),
                               fixtures::ring_net(11, 2), generate(ba)}) {
        for (int i = 0; i < net.size(); ++i) {
            CHECK(std::abs(net.weights().row(i).sum() - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("barabasi-albert n=100 m=3 has mean out-degree of at least 3") {
    GraphSpec spec;
    spec.kind = GraphKind::barabasi_albert;
    spec.n = 100;
    spec.m = 3;
    spec.seed = 42;
    CHECK(generate(spec).mean_out_degree() >= 3.0);
}

TEST_CASE("generate rejects out-of-range specs") {
    GraphSpec ba;
    ba.kind = GraphKind::barabasi_albert;
    ba.n = 3;
    ba.m = 3;
    CHECK_THROWS_AS(generate(ba), InvalidSpec);
    CHECK_THROWS_AS(fixtures::complete_net(1), InvalidSpec);
    CHECK_THROWS_AS(fixtures::ring_net(6, 3), InvalidSpec);
}

TEST_CASE("save then load is the identity on the weights") {
    const auto path = scratch_file("roundtrip.txt");
    GraphSpec ba;
    ba.kind = GraphKind::barabasi_albert;
    ba.n = 50;
    ba.m = 3;
    ba.seed = 9;
    for (const Network& net : {fixtures::complete_net(4), generate(ba)}) {
        save_network(net, path.string());
        const Network back = load_network(path.string());
        CHECK(net.weights() == back.weights());
    }
}

TEST_CASE("load_network rejects a row summing to 0.9") {
    const auto path = scratch_file("badsum.txt");
    write_file(path, "n 2\n0 1 1.0\n1 0 0.9\n");
    CHECK_THROWS_AS(load_network(path.string()), ValidationError);
}

TEST_CASE("load_network reports the line of a non-numeric token") {
    const auto path = scratch_file("garbage.txt");
    write_file(path, "n 2\n0 1 1.0\n1 zero 1.0\n");
    try {
        load_network(path.string());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("load_network renormalizes tiny row-sum drift with a warning") {
    const auto path = scratch_file("drift.txt");
    write_file(path, "n 2\n0 1 1.0000001\n1 0 1.0\n");
    std::vector<std::string> warnings;
    const Network net = load_network(path.string(), &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("row 0") != std::string::npos);
    CHECK(net.weight(0, 1) == 1.0);

    write_file(path, "n 2\n0 1 1.001\n1 0 1.0\n");
    CHECK_THROWS_AS(load_network(path.string()), ValidationError);
}

TEST_CASE("load_network ignores comments and leaves unlisted pairs at zero") {
    const auto path = scratch_file("comments.txt");
    write_file(path, "# influence network\nn 3\n0 1 0.5\n0 2 0.5  # split\n1 2 1.0\n2 1 1.0\n");
    const Network net = load_network(path.string());
    CHECK(net.weight(0, 1) == 0.5);
    CHECK(net.weight(1, 0) == 0.0);
    CHECK(net.weight(2, 1) == 1.0);
}

TEST_CASE("load_network rejects duplicate edges and bad indices") {
    const auto dup = scratch_file("dup.txt");
    write_file(dup, "n 2\n0 1 0.5\n0 1 0.5\n1 0 1.0\n");
    CHECK_THROWS_AS(load_network(dup.string()), ParseError);

    const auto range = scratch_file("range.txt");
    write_file(range, "n 2\n0 5 1.0\n1 0 1.0\n");
    CHECK_THROWS_AS(load_network(range.string()), ParseError);
}
