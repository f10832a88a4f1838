#include <cmath>

#include "doctest.h"
#include "support/networks.hpp"
#include "support/oracles.hpp"
#include "wtn/error.hpp"
#include "wtn/clustering.hpp"

using namespace wtn;
using namespace wtn::testing;

namespace {

// Two disconnected directed cliques of size k with unit weights.
DenseMatrix two_cliques(std::size_t k) {
    DenseMatrix w(2 * k);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                if (i != j) w(b * k + i, b * k + j) = 1.0;
    return w;
}

}  // namespace

TEST_CASE("directed modularity reference values") {
    const FlowGraph g(two_cliques(4));
    std::vector<std::size_t> one(8, 0);
    CHECK(std::abs(directed_modularity(g, one)) <= 1e-15);

    std::vector<std::size_t> cliques{0, 0, 0, 0, 1, 1, 1, 1};
    // Each clique holds half the weight and half of every degree sum:
    // Q = 2 * (1/2 - 1/4) = 1/2.
    CHECK(directed_modularity(g, cliques) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(directed_modularity(g, cliques) == doctest::Approx(naive_modularity(two_cliques(4), cliques)));

    Rng rng(3);
    const auto m = random_money_matrix(rng, 9, 0.5);
    const FlowGraph rg = FlowGraph::from_money_matrix(m);
    std::vector<std::size_t> singletons(9);
    for (std::size_t i = 0; i < 9; ++i) singletons[i] = i;
    double expected = 0.0;
    for (std::size_t i = 0; i < 9; ++i) expected -= rg.out_degree(i) * rg.in_degree(i);
    expected /= rg.total() * rg.total();
    CHECK(directed_modularity(rg, singletons) == doctest::Approx(expected).epsilon(1e-13));

    CHECK_THROWS_AS(directed_modularity(FlowGraph(DenseMatrix(3)), std::vector<std::size_t>{0, 0, 0}), Error);
    CHECK_THROWS_AS(directed_modularity(g, std::vector<std::size_t>{0, 0}), Error);
}

TEST_CASE("modularity agrees with the literal double sum") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = random_money_matrix(rng, 4 + trial % 10, 0.4);
        const FlowGraph g = FlowGraph::from_money_matrix(m);
        std::vector<std::size_t> part(g.size());
        for (auto& p : part) p = uniform_below(rng, 3);
        DenseMatrix w(g.size());
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::size_t j = 0; j < g.size(); ++j) w(i, j) = g.weight(i, j);
        CHECK(directed_modularity(g, part) == doctest::Approx(naive_modularity(w, part)).epsilon(1e-12));
        const double q = directed_modularity(m, part);
        CHECK(q >= -1.0);
        CHECK(q <= 1.0);
    }
}

TEST_CASE("louvain separates disconnected cliques") {
    const FlowGraph g(two_cliques(5));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto part = louvain(g, seed);
        CHECK(part.n_communities == 2);
        CHECK(canonical(part.community) == std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
        CHECK(part.modularity == doctest::Approx(0.5));
    }
}

TEST_CASE("louvain finds the brute-force optimum on small planted graphs") {
    Rng rng(101);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<std::size_t> truth;
        const auto w = planted_blocks(rng, 8, 2, 10.0, 1.0, 0.3, &truth);
        double best_q = 0.0;
        const auto best = brute_force_best_partition(w, &best_q);
        CHECK(canonical(best) == canonical(truth));
        const auto part = louvain(FlowGraph(w), static_cast<std::uint64_t>(trial));
        CHECK(canonical(part.community) == canonical(truth));
        CHECK(part.modularity == doctest::Approx(best_q).epsilon(1e-12));
    }
}

TEST_CASE("louvain modularity history and baselines") {
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = random_money_matrix(rng, 10 + trial, 0.3);
        const FlowGraph g = FlowGraph::from_money_matrix(m);
        const auto part = louvain(g, static_cast<std::uint64_t>(trial));
        for (std::size_t i = 1; i < part.pass_modularity.size(); ++i) {
            CHECK(part.pass_modularity[i] >= part.pass_modularity[i - 1] - 1e-12);
        }
        std::vector<std::size_t> one(g.size(), 0), singletons(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) singletons[i] = i;
        CHECK(part.modularity >= directed_modularity(g, one) - 1e-12);
        CHECK(part.modularity >= directed_modularity(g, singletons) - 1e-12);
        CHECK(part.modularity == doctest::Approx(directed_modularity(g, part.community)).epsilon(1e-12));
        // Contiguous ids.
        const auto sizes = part.community_sizes();
        for (auto s : sizes) CHECK(s > 0);
        // Deterministic.
        CHECK(louvain(g, static_cast<std::uint64_t>(trial)).community == part.community);
    }
}

TEST_CASE("leaders") {
    const auto m = three_country();
    const TradeNetwork net(m);
    ClusterPartition one{{0, 0, 0}, 1, 0.0, {0.0}, {}};
    CHECK(label_leaders(one, net) == std::vector<CountryIndex>{1});  // B

    ClusterPartition singles{{0, 1, 2}, 3, 0.0, {0.0}, {}};
    CHECK(label_leaders(singles, net) == std::vector<CountryIndex>{0, 1, 2});

    // max(P, P*) ties: A imports 6, exports 2; B imports 2, exports 6.
    // Equal max, B has the larger P*.
    DenseMatrix v(3);
    v(0, 1) = 6.0;  // B -> A
    v(1, 0) = 2.0;  // A -> B
    const TradeNetwork tie(MoneyMatrix(2010, CountryTable({"A", "B", "C"}), v));
    ClusterPartition ab{{0, 0, 1}, 2, 0.0, {0.0}, {}};
    CHECK(label_leaders(ab, tie)[0] == 1);
}

TEST_CASE("cluster summary pools small communities") {
    CountryTable t({"A", "B", "C", "D", "E", "F"});
    ClusterPartition p{{0, 0, 0, 0, 1, 2}, 3, 0.1, {0.0, 0.1}, {2, 4, 5}};
    const auto rows = summarize_clusters(p, t, 4);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].label == "C");
    CHECK(rows[0].size == 4);
    CHECK(rows[1].label == "Others");
    CHECK(rows[1].size == 2);
}
