#include "wtn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wtn/error.hpp"
#include "wtn/rng.hpp"

namespace wtn {

FlowGraph::FlowGraph(DenseMatrix weights) : w_(std::move(weights)), out_(w_.size(), 0.0), in_(w_.size(), 0.0) {
    const std::size_t n = w_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = w_(i, j);
            if (!(v >= 0.0) || !std::isfinite(v)) throw Error("flow graph: weights must be finite and >= 0");
            out_[i] += v;
            in_[j] += v;
        }
    }
    total_ = std::accumulate(out_.begin(), out_.end(), 0.0);
}

FlowGraph FlowGraph::from_money_matrix(const MoneyMatrix& m) {
    const std::size_t n = m.size();
    DenseMatrix w(n);
    for (std::size_t from = 0; from < n; ++from) {
        for (std::size_t to = 0; to < n; ++to) w(from, to) = m.flow(from, to);
    }
    return FlowGraph(std::move(w));
}

double directed_modularity(const FlowGraph& g, std::span<const std::size_t> community) {
    const std::size_t n = g.size();
    if (community.size() != n) throw Error("modularity: partition size differs from graph size");
    if (!(g.total() > 0.0)) throw Error("modularity: graph has zero total weight");
    const std::size_t k = n == 0 ? 0 : *std::max_element(community.begin(), community.end()) + 1;
    std::vector<double> internal(k, 0.0), out(k, 0.0), in(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out[community[i]] += g.out_degree(i);
        in[community[i]] += g.in_degree(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (community[i] == community[j]) internal[community[i]] += g.weight(i, j);
        }
    }
    const double w = g.total();
    double q = 0.0;
    for (std::size_t c = 0; c < k; ++c) q += internal[c] / w - out[c] * in[c] / (w * w);
    return q;
}

double directed_modularity(const MoneyMatrix& m, std::span<const std::size_t> community) {
    return directed_modularity(FlowGraph::from_money_matrix(m), community);
}

std::vector<std::size_t> ClusterPartition::community_sizes() const {
    std::vector<std::size_t> sizes(n_communities, 0);
    for (std::size_t c : community) ++sizes.at(c);
    return sizes;
}

namespace {

// One level of the Louvain hierarchy: a weighted digraph that may carry
// self-loops (the internal weight of merged communities).
struct Level {
    std::size_t n = 0;
    std::vector<double> w;  // row-major, w[i * n + j] = weight i -> j
    std::vector<double> out;
    std::vector<double> in;

    double weight(std::size_t i, std::size_t j) const { return w[i * n + j]; }
};

Level level_from_graph(const FlowGraph& g) {
    Level lv;
    lv.n = g.size();
    lv.w.resize(lv.n * lv.n);
    lv.out.resize(lv.n);
    lv.in.resize(lv.n);
    for (std::size_t i = 0; i < lv.n; ++i) {
        for (std::size_t j = 0; j < lv.n; ++j) lv.w[i * lv.n + j] = g.weight(i, j);
        lv.out[i] = g.out_degree(i);
        lv.in[i] = g.in_degree(i);
    }
    return lv;
}

// Local-move phase. Returns true if any node changed community.
bool local_moves(const Level& lv, double total, std::vector<std::size_t>& comm, Rng& rng,
                 const LouvainOptions& opts) {
    const std::size_t n = lv.n;
    comm.resize(n);
    std::iota(comm.begin(), comm.end(), std::size_t{0});
    std::vector<double> tot_out = lv.out;
    std::vector<double> tot_in = lv.in;
    std::vector<double> link_out(n, 0.0), link_in(n, 0.0);
    std::vector<std::size_t> touched;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    const double w2 = total * total;
    bool any_move = false;
    for (std::size_t round = 0; round < 1000; ++round) {
        shuffle(std::span<std::size_t>(order), rng);
        bool moved = false;
        for (std::size_t i : order) {
            const std::size_t old_c = comm[i];
            tot_out[old_c] -= lv.out[i];
            tot_in[old_c] -= lv.in[i];

            touched.clear();
            touched.push_back(old_c);
            link_out[old_c] = link_in[old_c] = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double wij = lv.weight(i, j);
                const double wji = lv.weight(j, i);
                if (wij == 0.0 && wji == 0.0) continue;
                const std::size_t c = comm[j];
                if (std::find(touched.begin(), touched.end(), c) == touched.end()) {
                    touched.push_back(c);
                }
                link_out[c] += wij;
                link_in[c] += wji;
            }

            auto gain = [&](std::size_t c) {
                return (link_out[c] + link_in[c]) / total - (lv.out[i] * tot_in[c] + lv.in[i] * tot_out[c]) / w2;
            };
            std::size_t best = old_c;
            double best_gain = gain(old_c);
            for (std::size_t c : touched) {
                if (c == old_c) continue;
                const double g = gain(c);
                if (g > best_gain + opts.min_gain) {
                    best = c;
                    best_gain = g;
                }
            }
            for (std::size_t c : touched) link_out[c] = link_in[c] = 0.0;

            comm[i] = best;
            tot_out[best] += lv.out[i];
            tot_in[best] += lv.in[i];
            if (best != old_c) moved = true;
        }
        if (!moved) break;
        any_move = true;
    }
    return any_move;
}

// Renumbers communities 0..k-1 by first appearance; returns k.
std::size_t renumber(std::vector<std::size_t>& comm) {
    std::vector<std::size_t> map(comm.size(), static_cast<std::size_t>(-1));
    std::size_t next = 0;
    for (auto& c : comm) {
        if (map[c] == static_cast<std::size_t>(-1)) map[c] = next++;
        c = map[c];
    }
    return next;
}

Level aggregate(const Level& lv, const std::vector<std::size_t>& comm, std::size_t k) {
    Level up;
    up.n = k;
    up.w.assign(k * k, 0.0);
    up.out.assign(k, 0.0);
    up.in.assign(k, 0.0);
    for (std::size_t i = 0; i < lv.n; ++i) {
        up.out[comm[i]] += lv.out[i];
        up.in[comm[i]] += lv.in[i];
        for (std::size_t j = 0; j < lv.n; ++j) up.w[comm[i] * k + comm[j]] += lv.weight(i, j);
    }
    return up;
}

}  // namespace

ClusterPartition louvain(const FlowGraph& g, std::uint64_t seed, const LouvainOptions& opts) {
    if (!(g.total() > 0.0)) throw Error("louvain: graph has zero total weight");
    const std::size_t n = g.size();
    Rng rng(splitmix64(seed));

    ClusterPartition result;
    result.community.resize(n);
    std::iota(result.community.begin(), result.community.end(), std::size_t{0});
    result.n_communities = n;
    result.pass_modularity.push_back(directed_modularity(g, result.community));

    Level lv = level_from_graph(g);
    std::vector<std::size_t> comm;
    for (std::size_t pass = 0; pass < opts.max_passes; ++pass) {
        if (!local_moves(lv, g.total(), comm, rng, opts)) break;
        const std::size_t k = renumber(comm);
        for (auto& c : result.community) c = comm[c];
        lv = aggregate(lv, comm, k);
        result.n_communities = k;
        result.pass_modularity.push_back(directed_modularity(g, result.community));
        if (k == 1) break;
    }
    // Level ids follow the aggregated graph; expose ids by first appearance.
    result.n_communities = renumber(result.community);
    result.modularity = result.pass_modularity.back();
    return result;
}

ClusterPartition louvain(const MoneyMatrix& m, std::uint64_t seed, const LouvainOptions& opts) {
    return louvain(FlowGraph::from_money_matrix(m), seed, opts);
}

std::vector<CountryIndex> label_leaders(const ClusterPartition& partition, const TradeNetwork& net) {
    const std::size_t n = net.size();
    if (partition.community.size() != n) throw Error("label_leaders: partition size differs from network size");
    const auto& p = net.P();
    const auto& ps = net.P_star();
    auto better = [&](CountryIndex a, CountryIndex b) {
        const double ma = std::max(p[a], ps[a]);
        const double mb = std::max(p[b], ps[b]);
        if (ma != mb) return ma > mb;
        if (ps[a] != ps[b]) return ps[a] > ps[b];
        return net.table().iso(a) < net.table().iso(b);
    };
    constexpr auto kNone = static_cast<CountryIndex>(-1);
    std::vector<CountryIndex> leaders(partition.n_communities, kNone);
    for (CountryIndex c = 0; c < n; ++c) {
        auto& lead = leaders.at(partition.community[c]);
        if (lead == kNone || better(c, lead)) lead = c;
    }
    return leaders;
}

std::vector<ClusterSummaryRow> summarize_clusters(const ClusterPartition& partition, const CountryTable& table,
                                                  std::size_t min_size) {
    if (partition.leaders.size() != partition.n_communities) {
        throw Error("summarize_clusters: leaders have not been labelled");
    }
    const auto sizes = partition.community_sizes();
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    std::vector<ClusterSummaryRow> rows;
    ClusterSummaryRow others{"Others", 0, {}};
    for (std::size_t c : order) {
        if (sizes[c] >= min_size) {
            rows.push_back({table.iso(partition.leaders[c]), sizes[c], {c}});
        } else {
            others.size += sizes[c];
            others.communities.push_back(c);
        }
    }
    if (others.size > 0) rows.push_back(std::move(others));
    return rows;
}

}  // namespace wtn
