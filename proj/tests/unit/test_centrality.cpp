#include <cmath>
#include <numeric>

#include "doctest.h"
#include "support/networks.hpp"
#include "support/oracles.hpp"
#include "wtn/error.hpp"
#include "wtn/centrality.hpp"

using namespace wtn;
using namespace wtn::testing;

TEST_CASE("google operator basics") {
    const std::size_t n = 4;
    DenseMatrix uniform(n, 0.25);
    const GoogleOperator g(uniform, 0.85);
    std::vector<double> v{0.7, 0.1, 0.1, 0.1}, out(n);
    g.apply(v, out);
    for (double x : out) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));

    DenseMatrix with_dangling(3);
    with_dangling(1, 0) = 1.0;
    with_dangling(0, 1) = 1.0;  // column 2 is all zero
    const GoogleOperator gd(with_dangling, 0.5);
    REQUIRE(gd.dangling() == std::vector<std::size_t>{2});
    std::vector<double> e2{0.0, 0.0, 1.0}, col(3);
    gd.apply(e2, col);
    for (double x : col) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    DenseMatrix cyclic(3);
    cyclic(1, 0) = cyclic(2, 1) = cyclic(0, 2) = 1.0;
    const GoogleOperator gc(cyclic, 0.85);
    std::vector<double> u(3, 1.0 / 3.0), cu(3);
    gc.apply(u, cu);
    for (double x : cu) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(GoogleOperator(cyclic, 0.0), Error);
    CHECK_THROWS_AS(GoogleOperator(cyclic, 1.0), Error);
    DenseMatrix bad(2);
    bad(0, 0) = 0.5;
    CHECK_THROWS_AS(GoogleOperator(bad, 0.5), Error);
}

TEST_CASE("power iteration on a symmetric ring is uniform") {
    for (std::size_t n : {3U, 8U, 31U}) {
        const TradeNetwork net(ring(n));
        for (double alpha : {0.5, 0.85}) {
            const auto pr = pagerank(net, alpha);
            for (double x : pr.values) {
                CHECK(x == pr.values[0]);
                CHECK(std::abs(x - 1.0 / n) <= 4 * std::numeric_limits<double>::epsilon() / n);
            }
            const auto w = centrality_weights(net, alpha);
            for (double x : w.node_weight) CHECK(x == doctest::Approx(2.0 / n).epsilon(1e-14));
        }
    }
}

TEST_CASE("pagerank on the three-country example matches a dense eigen-solve") {
    const TradeNetwork net(three_country());
    for (double alpha : {0.5, 0.85}) {
        const auto pr = pagerank(net, alpha);
        const auto ref = dense_google_stationary(net.S(), alpha);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(pr.values[i] - ref[i]) <= 1e-10);
        CHECK(pr.residual < 1e-12);
        CHECK(pr.alpha == alpha);
        CHECK(pr.direction == CentralityDirection::pagerank);
        const double sum = std::accumulate(pr.values.begin(), pr.values.end(), 0.0);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        // Bitwise repeatable.
        CHECK(pagerank(net, alpha).values == pr.values);
    }
}

TEST_CASE("damping to one approaches the undamped stationary measure") {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        const TradeNetwork net(random_money_matrix(rng, 6, 0.6));
        const auto pr = pagerank(net, 0.9999, {1e-13, 1000000});
        const auto stat = dense_stationary(net.S());
        for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(pr.values[i] - stat[i]) <= 1e-4);
    }
}

TEST_CASE("symmetric trade gives identical pagerank and cheirank") {
    Rng rng(9);
    const auto base = random_money_matrix(rng, 15, 0.4);
    DenseMatrix sym(15);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = 0; j < 15; ++j) sym(i, j) = base.values()(i, j) + base.values()(j, i);
    const TradeNetwork net(MoneyMatrix(2000, base.table(), sym));
    const auto pr = pagerank(net, 0.5);
    const auto cr = cheirank(net, 0.5);
    CHECK(cr.direction == CentralityDirection::cheirank);
    for (std::size_t i = 0; i < 15; ++i) CHECK(std::abs(pr.values[i] - cr.values[i]) <= 1e-12);
}

TEST_CASE("fixed points of the three-country example do not depend on the weights") {
    const TradeNetwork net(three_country());
    const ResolvedAnchors anchors(three_country_anchors(), net.table());
    const auto trade = enumerate_fixed_points(net, trade_probability_weights(net), anchors);
    for (double alpha : {0.5, 0.85}) {
        const auto w = centrality_weights(net, alpha);
        const auto pr = pagerank(net, alpha);
        const auto cr = cheirank(net, alpha);
        for (std::size_t c = 0; c < 3; ++c) CHECK(w.node_weight[c] == pr.values[c] + cr.values[c]);
        CHECK(enumerate_fixed_points(net, w, anchors) == trade);
    }
}

TEST_CASE("non-convergence is reported with the residual") {
    Rng rng(1);
    const TradeNetwork net(random_money_matrix(rng, 10, 0.5));
    try {
        (void)pagerank(net, 0.85, {1e-15, 2});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
    }
    CHECK_THROWS_AS(power_iterate(GoogleOperator(net.S(), 0.5), {0.0, 10}), Error);
}
