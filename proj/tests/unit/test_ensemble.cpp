#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "support/networks.hpp"
#include "wtn/ensemble.hpp"
#include "wtn/error.hpp"

using namespace wtn;
using namespace wtn::testing;

TEST_CASE("random initial configurations") {
    Rng gen(5);
    const TradeNetwork net(random_money_matrix(gen, 194, 0.1));
    const ResolvedAnchors anchors({{net.table().iso(0)}, {net.table().iso(1)}}, net.table());
    REQUIRE(anchors.free_indices().size() == 192);

    Rng rng(1);
    const auto none = random_initial_config(0.0, anchors, rng);
    CHECK(none.usd_count() == 1);
    const auto all = random_initial_config(1.0, anchors, rng);
    CHECK(all.usd_count() == 193);
    CHECK(all[1] == kCny);

    std::vector<std::size_t> hits(194, 0);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng r(derive_seed(42, 0, seed));
        const auto s = random_initial_config(0.5, anchors, r);
        std::size_t free_usd = 0;
        for (CountryIndex c : anchors.free_indices()) {
            if (s[c] == kUsd) {
                ++free_usd;
                ++hits[c];
            }
        }
        CHECK(free_usd == 96);
        CHECK(s[0] == kUsd);
        CHECK(s[1] == kCny);
    }
    // Each free country is picked with probability 1/2; 1000 draws give a
    // standard deviation of ~16, so [400, 600] is > 6 sigma wide.
    for (CountryIndex c : anchors.free_indices()) {
        CHECK(hits[c] > 400);
        CHECK(hits[c] < 600);
    }
    CHECK_THROWS_AS(random_initial_config(1.5, anchors, rng), Error);
}

TEST_CASE("default grid") {
    const auto g = default_grid();
    REQUIRE(g.size() == 101);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[50] == 0.5);
    CHECK(g[7] == 7.0 / 100.0);
}

TEST_CASE("config validation") {
    ExperimentConfig cfg;
    cfg.f_i_grid = {};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.f_i_grid = {0.2, 0.1};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.f_i_grid = {0.1, 0.1};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.f_i_grid = {-0.1, 0.5};
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.f_i_grid = {0.1, 0.5};
    cfg.n_runs = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg.n_runs = 1;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("three-country scan has a single attractor") {
    const TradeNetwork net(three_country());
    ExperimentConfig cfg;
    cfg.f_i_grid = {0.0, 0.3, 0.5, 1.0};
    cfg.n_runs = 40;
    cfg.anchors = three_country_anchors();
    cfg.workers = 2;
    const auto scan = run_scan(cfg, net);
    for (const auto& pt : scan.points) {
        REQUIRE(pt.attractors.size() == 1);
        CHECK(pt.attractors[0].f_f == doctest::Approx(1.0 / 3.0));
        CHECK(pt.attractors[0].rho == 1.0);
        CHECK(pt.nonconverged == 0);
    }
    CHECK(scan.p_dollar[0] == 1.0);
    CHECK(scan.p_dollar[1] == 0.0);
    CHECK(scan.p_dollar[2] == 0.0);
    CHECK(scan.p_yuan(2) == 1.0);

    const auto groups = classify_groups(scan, net);
    CHECK(groups.labels[0] == GroupLabel::usd);
    CHECK(groups.labels[1] == GroupLabel::cny);
    CHECK(groups.labels[2] == GroupLabel::cny);
    CHECK(groups.count(GroupLabel::swing) == 0);
    CHECK(groups.volume(GroupLabel::usd) == doctest::Approx(0.25));
    CHECK(groups.volume(GroupLabel::cny) == doctest::Approx(0.75));
}

TEST_CASE("scan invariants on random networks") {
    Rng gen(12);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 6 + static_cast<std::size_t>(trial % 6);
        const TradeNetwork net(random_money_matrix(gen, n, 0.5));
        ExperimentConfig cfg;
        cfg.f_i_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
        cfg.n_runs = 60;
        cfg.tau_max = 10;
        cfg.master_seed = static_cast<std::uint64_t>(trial);
        cfg.anchors = random_anchors(gen, net.table(), 1, 1);
        cfg.workers = 1;
        const auto w = trade_probability_weights(net);
        const auto scan = run_scan(cfg, net, w);

        const ResolvedAnchors anchors(cfg.anchors, net.table());
        const auto fps = enumerate_fixed_points(net, w, anchors);
        std::set<std::size_t> fixed_counts;
        for (const auto& fp : fps) fixed_counts.insert(fp.usd_count());

        for (const auto& pt : scan.points) {
            std::size_t clustered = 0;
            for (const auto& a : pt.attractors) {
                clustered += a.runs;
                CHECK(a.usd_count_min == a.usd_count_max);
                CHECK(fixed_counts.count(a.usd_count_min) == 1);
            }
            CHECK(clustered + pt.nonconverged == pt.runs);
            double rho = 0.0;
            for (const auto& a : pt.attractors) rho += a.rho;
            CHECK(std::abs(rho + static_cast<double>(pt.nonconverged) / pt.runs - 1.0) <= 1e-12);
        }
        for (CountryIndex c = 0; c < n; ++c) {
            if (anchors.is_fixed(c)) CHECK(scan.p_dollar[c] == (anchors.pinned(c) == kUsd ? 1.0 : 0.0));
            CHECK(scan.p_dollar[c] >= 0.0);
            CHECK(scan.p_dollar[c] <= 1.0);
        }
        const auto groups = classify_groups(scan, net);
        CHECK(groups.counts[0] + groups.counts[1] + groups.counts[2] == n);
        CHECK(std::abs(groups.volume_share[0] + groups.volume_share[1] + groups.volume_share[2] - 1.0) <= 1e-9);
    }
}

TEST_CASE("scan does not depend on the number of workers") {
    Rng gen(2024);
    const TradeNetwork net(random_money_matrix(gen, 30, 0.3));
    ExperimentConfig cfg;
    cfg.f_i_grid = {0.1, 0.5, 0.9};
    cfg.n_runs = 300;
    cfg.anchors = random_anchors(gen, net.table(), 2, 2);
    cfg.master_seed = 77;
    cfg.workers = 1;
    const auto a = run_scan(cfg, net);
    cfg.workers = 7;
    const auto b = run_scan(cfg, net);
    CHECK(a.p_dollar == b.p_dollar);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t g = 0; g < a.points.size(); ++g) {
        CHECK(a.points[g].usd_final_counts == b.points[g].usd_final_counts);
        CHECK(a.points[g].nonconverged == b.points[g].nonconverged);
        REQUIRE(a.points[g].attractors.size() == b.points[g].attractors.size());
        for (std::size_t k = 0; k < a.points[g].attractors.size(); ++k) {
            CHECK(a.points[g].attractors[k].f_f == b.points[g].attractors[k].f_f);
            CHECK(a.points[g].attractors[k].runs == b.points[g].attractors[k].runs);
        }
    }
    cfg.master_seed = 78;
    const auto c = run_scan(cfg, net);
    bool differs = false;
    for (std::size_t g = 0; g < a.points.size(); ++g) differs |= a.points[g].usd_final_counts != c.points[g].usd_final_counts;
    CHECK(differs);
}

TEST_CASE("cluster tolerance merges nearby fractions") {
    const TradeNetwork net(two_hub_network());
    ExperimentConfig cfg;
    cfg.f_i_grid = {0.5};
    cfg.n_runs = 200;
    cfg.anchors = two_hub_anchors();
    cfg.workers = 2;
    const auto exact = run_scan(cfg, net);
    REQUIRE(exact.points[0].attractors.size() == 2);
    cfg.cluster_tol = 0.5;
    const auto merged = run_scan(cfg, net);
    REQUIRE(merged.points[0].attractors.size() == 1);
    CHECK(merged.points[0].attractors[0].runs == 200);
    CHECK(merged.points[0].attractors[0].usd_count_min == 1);
    CHECK(merged.points[0].attractors[0].usd_count_max == 11);
}

TEST_CASE("group time series") {
    GroupPartition g;
    g.labels = {GroupLabel::usd, GroupLabel::cny, GroupLabel::cny, GroupLabel::swing};
    g.counts = {1, 2, 1};
    g.volume_share = {0.2, 0.5, 0.3};
    GroupPartition h = g;
    h.counts = {1, 3, 0};
    h.volume_share = {0.2, 0.8, 0.0};
    const auto rows = group_time_series({{2019, h}, {2010, g}});
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].year == 2010);
    CHECK(rows[0].label == GroupLabel::cny);
    CHECK(rows[1].label == GroupLabel::swing);
    CHECK(rows[2].label == GroupLabel::usd);
    CHECK(rows[3].year == 2019);
    double countries = 0.0, volume = 0.0;
    for (int i = 0; i < 3; ++i) {
        countries += rows[static_cast<std::size_t>(i)].country_fraction;
        volume += rows[static_cast<std::size_t>(i)].volume_fraction;
    }
    CHECK(countries == doctest::Approx(1.0));
    CHECK(volume == doctest::Approx(1.0));
    CHECK(rows[0].country_fraction == 0.5);
    CHECK_THROWS_AS(group_time_series({}), Error);
}

TEST_CASE("centrality weights mode runs") {
    const TradeNetwork net(three_country());
    ExperimentConfig cfg;
    cfg.f_i_grid = {0.0, 1.0};
    cfg.n_runs = 10;
    cfg.anchors = three_country_anchors();
    cfg.weight_mode = WeightMode::centrality;
    const auto scan = run_scan(cfg, net);
    REQUIRE(scan.points[0].attractors.size() == 1);
    CHECK(scan.points[0].attractors[0].f_f == doctest::Approx(1.0 / 3.0));
}
