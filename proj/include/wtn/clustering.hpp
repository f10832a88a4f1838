#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wtn/money_matrix.hpp"
#include "wtn/trade_network.hpp"

namespace wtn {

/// Weighted directed graph in adjacency form, weight(i, j) = flow i -> j.
class FlowGraph {
public:
    explicit FlowGraph(DenseMatrix weights);
    /// Transposes the importer-major money matrix into i -> j form.
    static FlowGraph from_money_matrix(const MoneyMatrix& m);

    std::size_t size() const noexcept { return w_.size(); }
    double weight(std::size_t from, std::size_t to) const { return w_(from, to); }
    double out_degree(std::size_t i) const { return out_[i]; }
    double in_degree(std::size_t i) const { return in_[i]; }
    double total() const noexcept { return total_; }

private:
    DenseMatrix w_;
    std::vector<double> out_;
    std::vector<double> in_;
    double total_ = 0.0;
};

/// Q = (1/W) sum_ij [A_ij - out_i in_j / W] delta(c_i, c_j).
/// Throws wtn::Error if W = 0 or the partition size mismatches.
double directed_modularity(const FlowGraph& g, std::span<const std::size_t> community);
double directed_modularity(const MoneyMatrix& m, std::span<const std::size_t> community);

struct ClusterPartition {
    /// Contiguous ids 0..n_communities-1, numbered by first appearance.
    std::vector<std::size_t> community;
    std::size_t n_communities = 0;
    double modularity = 0.0;
    /// Modularity of the original graph after each aggregation pass.
    std::vector<double> pass_modularity;
    /// Leader country per community; empty until label_leaders is applied.
    std::vector<CountryIndex> leaders;

    std::vector<std::size_t> community_sizes() const;
};

struct LouvainOptions {
    /// Moves must improve modularity by more than this.
    double min_gain = 1e-12;
    std::size_t max_passes = 100;
};

/// Two-phase Louvain with the directed (out x in) null model. Node visit
/// order in every local-move phase is shuffled from `seed`.
ClusterPartition louvain(const FlowGraph& g, std::uint64_t seed, const LouvainOptions& opts = {});
ClusterPartition louvain(const MoneyMatrix& m, std::uint64_t seed, const LouvainOptions& opts = {});

/// Per community, the country maximizing max(P, P*); ties by larger P*,
/// then by iso code.
std::vector<CountryIndex> label_leaders(const ClusterPartition& partition, const TradeNetwork& net);

struct ClusterSummaryRow {
    /// Leader iso, or "Others" for pooled small communities.
    std::string label;
    std::size_t size = 0;
    std::vector<std::size_t> communities;
};

/// Communities with at least min_size members get their own row (largest
/// first); the rest are pooled in an "Others" row. Requires leaders.
std::vector<ClusterSummaryRow> summarize_clusters(const ClusterPartition& partition, const CountryTable& table,
                                                  std::size_t min_size = 4);

}  // namespace wtn
