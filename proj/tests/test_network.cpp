#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aci/network.hpp"

#include <algorithm>
#include <random>

using namespace aci;

namespace {

Network path3() {
    // 0 - 1 - 2
    MatrixXd c(3, 2);
    c << 1, 2, 3, 4, 5, 6;
    return build_network("path", {{0, 1, 1.0}, {1, 2, 1.0}}, c);
}

Network random_network(int n, double p, std::mt19937_64& engine) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    std::vector<bool> chained(n, false);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (unif(engine) < p) {
                edges.push_back({i, j, 1.0 + unif(engine)});
                if (j == i + 1) chained[i] = true;
            }
    // ensure no isolated nodes: chain fallback
    for (int i = 0; i + 1 < n; ++i)
        if (!chained[i]) edges.push_back({i, i + 1, 0.5});
    MatrixXd c(n, 2);
    for (int i = 0; i < n; ++i) {
        c(i, 0) = unif(engine);
        c(i, 1) = unif(engine);
    }
    return build_network("rand", edges, c);
}

}  // namespace

TEST_CASE("single symmetric edge") {
    MatrixXd c(2, 1);
    c << 0.0, 1.0;
    Network net = build_network("pair", {{0, 1, 1.0}}, c);
    CHECK(net.weights()(0, 1) == 1.0);
    CHECK(net.weights()(1, 0) == 1.0);
    CHECK(net.weights()(0, 0) == 0.0);
    CHECK(net.weights()(1, 1) == 0.0);
}

TEST_CASE("self-edges are rejected") {
    MatrixXd c(1, 1);
    c << 0.0;
    CHECK_THROWS_AS(build_network("bad", {{0, 0, 1.0}}, c), std::invalid_argument);
}

TEST_CASE("hand-built weight matrix: degrees and row sums") {
    MatrixXd c = MatrixXd::Zero(3, 1);
    Network net = build_network("w", {{0, 1, 2.0}, {1, 2, 1.0}}, c);
    CHECK(net.weight_row_sums()(0) == doctest::Approx(2.0));
    CHECK(net.weight_row_sums()(1) == doctest::Approx(3.0));
    CHECK(net.weight_row_sums()(2) == doctest::Approx(1.0));
    int neighbors_of_1 = 0;
    for (int j = 0; j < 3; ++j)
        if (net.weights()(1, j) > 0) ++neighbors_of_1;
    CHECK(neighbors_of_1 == 2);
}

TEST_CASE("duplicate edges: identical ok, conflicting rejected") {
    MatrixXd c = MatrixXd::Zero(2, 1);
    CHECK_NOTHROW(build_network("dup", {{0, 1, 1.5}, {1, 0, 1.5}}, c));
    CHECK_THROWS_AS(build_network("conflict", {{0, 1, 1.5}, {1, 0, 2.0}}, c),
                    std::invalid_argument);
}

TEST_CASE("out-of-range edge index") {
    MatrixXd c = MatrixXd::Zero(2, 1);
    CHECK_THROWS_AS(build_network("oob", {{0, 5, 1.0}}, c), std::out_of_range);
}

TEST_CASE("isolated nodes: reject by default, drop on request") {
    MatrixXd c = MatrixXd::Zero(3, 1);
    c << 10, 20, 30;
    CHECK_THROWS_AS(build_network("iso", {{0, 1, 1.0}}, c), IsolatedNodeError);
    Network net = build_network("iso", {{0, 1, 1.0}}, c, IsolatedPolicy::Drop);
    CHECK(net.size() == 2);
    CHECK(net.covariates()(0, 0) == 10);
    CHECK(net.covariates()(1, 0) == 20);
}

TEST_CASE("unweighted exposure is the treated fraction") {
    MatrixXd c = MatrixXd::Zero(4, 1);
    // node 0 adjacent to 1,2,3
    Network net = build_network("star", {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {1, 2, 1.0}}, c);
    Assignment a(Eigen::Vector4i(0, 1, 0, 1));
    CHECK(neighbor_exposure(net, a, 0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("weighted exposure") {
    MatrixXd c = MatrixXd::Zero(3, 1);
    // node 0: neighbors 1 (weight 2) and 2 (weight 1)
    Network net = build_network("wstar", {{0, 1, 2.0}, {0, 2, 1.0}, {1, 2, 1.0}}, c);
    Assignment a(Eigen::Vector3i(0, 1, 0));
    CHECK(neighbor_exposure(net, a, 0) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("exposure boundaries") {
    Network net = path3();
    CHECK(neighbor_exposure(net, Assignment::ones(3), 1) == doctest::Approx(1.0));
    CHECK(neighbor_exposure(net, Assignment::zeros(3), 1) == doctest::Approx(0.0));
}

TEST_CASE("neighbor covariate aggregation") {
    SUBCASE("plain mean over two binary-weight neighbors") {
        MatrixXd c(3, 2);
        c << 0, 0, 1, 2, 3, 4;
        Network net = build_network("agg", {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}, c);
        VectorXd agg = aggregate_neighbor_covariates(net, 0);
        CHECK(agg(0) == doctest::Approx(2.0));
        CHECK(agg(1) == doctest::Approx(3.0));
    }
    SUBCASE("single neighbor is the identity") {
        MatrixXd c(2, 2);
        c << 0, 0, 0.5, 0.7;
        Network net = build_network("one", {{0, 1, 1.0}}, c);
        VectorXd agg = aggregate_neighbor_covariates(net, 0);
        CHECK(agg(0) == doctest::Approx(0.5));
        CHECK(agg(1) == doctest::Approx(0.7));
    }
    SUBCASE("weighted mean") {
        MatrixXd c(3, 2);
        c << 0, 0, 0, 0, 4, 8;  // node 0's neighbors: 1 (w=3, covs 0,0) and 2 (w=1, covs 4,8)
        Network net = build_network("wagg", {{0, 1, 3.0}, {0, 2, 1.0}, {1, 2, 1.0}}, c);
        VectorXd agg = aggregate_neighbor_covariates(net, 0);
        CHECK(agg(0) == doctest::Approx(1.0));
        CHECK(agg(1) == doctest::Approx(2.0));
    }
}

TEST_CASE("integrate produces one row per individual with g from exposures") {
    Network net = path3();
    SUBCASE("fully treated") {
        auto rows = integrate(net, Assignment::ones(3));
        REQUIRE(rows.size() == 3);
        for (const auto& obs : rows) {
            CHECK(obs.exposure == doctest::Approx(1.0));
            CHECK(obs.own_treatment == 1);
            CHECK_FALSE(obs.outcome.has_value());
        }
    }
    SUBCASE("fully controlled") {
        auto rows = integrate(net, Assignment::zeros(3));
        for (const auto& obs : rows) CHECK(obs.exposure == doctest::Approx(0.0));
    }
    SUBCASE("alternating on a path") {
        auto rows = integrate(net, Assignment(Eigen::Vector3i(1, 0, 1)));
        CHECK(rows[0].exposure == doctest::Approx(0.0));
        CHECK(rows[1].exposure == doctest::Approx(1.0));
        CHECK(rows[2].exposure == doctest::Approx(0.0));
    }
    SUBCASE("features are own covariates then neighbor averages") {
        auto rows = integrate(net, Assignment::zeros(3));
        REQUIRE(rows[0].features.size() == 4);
        CHECK(rows[0].features(0) == 1.0);
        CHECK(rows[0].features(1) == 2.0);
        CHECK(rows[0].features(2) == doctest::Approx(3.0));  // node 1's covariates
        CHECK(rows[0].features(3) == doctest::Approx(4.0));
    }
    SUBCASE("outcomes attach when provided") {
        VectorXd y(3);
        y << 7, 8, 9;
        auto rows = integrate(net, Assignment::zeros(3), y);
        CHECK(rows[2].outcome == doctest::Approx(9.0));
    }
}

TEST_CASE("exposure monotonicity under neighbor flips") {
    std::mt19937_64 engine(42);
    for (int trial = 0; trial < 30; ++trial) {
        Network net = random_network(8, 0.4, engine);
        VectorXi bits(8);
        for (int i = 0; i < 8; ++i) bits(i) = engine() % 2;
        Assignment before(bits);
        // flip one untreated node to treated
        std::vector<int> zeros;
        for (int i = 0; i < 8; ++i)
            if (bits(i) == 0) zeros.push_back(i);
        if (zeros.empty()) continue;
        const int flip = zeros[engine() % zeros.size()];
        bits(flip) = 1;
        Assignment after(bits);
        for (int i = 0; i < 8; ++i) {
            if (i == flip) continue;
            CHECK(neighbor_exposure(net, after, i) >=
                  neighbor_exposure(net, before, i) - 1e-12);
        }
    }
}

TEST_CASE("permutation equivariance of integrate") {
    std::mt19937_64 engine(7);
    Network net = random_network(6, 0.5, engine);
    VectorXi bits(6);
    for (int i = 0; i < 6; ++i) bits(i) = engine() % 2;
    Assignment assign(bits);
    auto rows = integrate(net, assign);

    std::vector<int> perm{3, 1, 5, 0, 4, 2};  // perm[new] = old
    MatrixXd w2(6, 6);
    MatrixXd c2(6, 2);
    VectorXi bits2(6);
    for (int a = 0; a < 6; ++a) {
        c2.row(a) = net.covariates().row(perm[a]);
        bits2(a) = bits(perm[a]);
        for (int b = 0; b < 6; ++b) w2(a, b) = net.weights()(perm[a], perm[b]);
    }
    Network permuted("perm", w2, c2);
    auto rows2 = integrate(permuted, Assignment(bits2));
    for (int a = 0; a < 6; ++a) {
        CHECK(rows2[a].exposure == doctest::Approx(rows[perm[a]].exposure));
        CHECK((rows2[a].features - rows[perm[a]].features).cwiseAbs().maxCoeff() ==
              doctest::Approx(0.0));
    }
}

TEST_CASE("aggregation stays in the neighbor min-max span") {
    std::mt19937_64 engine(11);
    for (int trial = 0; trial < 20; ++trial) {
        Network net = random_network(7, 0.4, engine);
        for (int i = 0; i < net.size(); ++i) {
            VectorXd agg = aggregate_neighbor_covariates(net, i);
            for (int k = 0; k < net.covariate_dim(); ++k) {
                double lo = 1e300, hi = -1e300;
                for (int j = 0; j < net.size(); ++j) {
                    if (net.weights()(i, j) > 0) {
                        lo = std::min(lo, net.covariates()(j, k));
                        hi = std::max(hi, net.covariates()(j, k));
                    }
                }
                CHECK(agg(k) >= lo - 1e-12);
                CHECK(agg(k) <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("mismatched assignment length") {
    Network net = path3();
    CHECK_THROWS_AS(integrate(net, Assignment::ones(5)), std::invalid_argument);
}
