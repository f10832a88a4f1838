#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wtn/spin_dynamics.hpp"
#include "wtn/trade_network.hpp"

namespace wtn {

enum class WeightMode { trade_probability, centrality };

struct ExperimentConfig {
    std::vector<double> f_i_grid;
    std::size_t n_runs = 10000;
    int tau_max = 10;
    std::uint64_t master_seed = 1;
    AnchorSpec anchors = AnchorSpec::baseline();
    WeightMode weight_mode = WeightMode::trade_probability;
    /// Damping factor for centrality weights.
    double alpha = 0.5;
    /// Final fractions closer than this are merged into one attractor.
    /// Unset means 0.5 / N, i.e. exact spin-count matching.
    std::optional<double> cluster_tol;
    SweepOrder order = SweepOrder::permutation;
    /// 0 selects std::thread::hardware_concurrency().
    unsigned workers = 0;

    /// Throws wtn::Error on an empty, unsorted or out-of-range grid, or n_runs == 0.
    void validate() const;
};

/// 0.00, 0.01, ..., 1.00.
std::vector<double> default_grid();

/// Anchors at their pinned values; exactly round(f_i * k_free) of the free
/// countries, chosen uniformly, at -1 and the rest at +1.
SpinConfig random_initial_config(double f_i, const ResolvedAnchors& anchors, Rng& rng);

struct Attractor {
    double f_f = 0.0;
    /// Range of USD counts merged into this attractor.
    std::size_t usd_count_min = 0;
    std::size_t usd_count_max = 0;
    std::size_t runs = 0;
    double rho = 0.0;
};

struct GridPointResult {
    double f_i = 0.0;
    std::size_t runs = 0;
    std::size_t nonconverged = 0;
    /// Sorted by f_f ascending.
    std::vector<Attractor> attractors;
    /// Converged runs at this grid point that ended with sigma_c = -1.
    std::vector<std::size_t> usd_final_counts;

    std::size_t converged() const noexcept { return runs - nonconverged; }
    /// Per-country P_$ conditioned on this f_i.
    double p_dollar(CountryIndex c) const;
};

struct BistabilityScan {
    CountryTable table;
    std::vector<GridPointResult> points;
    /// P_$ per country over all converged runs of the whole grid.
    std::vector<double> p_dollar;
    /// Converged runs at every grid point summed.
    std::size_t converged_runs = 0;
    std::size_t nonconverged_runs = 0;

    double p_yuan(CountryIndex c) const { return 1.0 - p_dollar.at(c); }
};

/// Runs cfg.n_runs relaxations per grid point. Per-run streams are seeded
/// from (master_seed, grid index, run index) and aggregation uses integer
/// counts only, so the result does not depend on cfg.workers.
BistabilityScan run_scan(const ExperimentConfig& cfg, const TradeNetwork& net, const CouplingWeights& w);

/// Picks the weights from cfg.weight_mode.
BistabilityScan run_scan(const ExperimentConfig& cfg, const TradeNetwork& net);

CouplingWeights weights_for(const ExperimentConfig& cfg, const TradeNetwork& net);

enum class GroupLabel : int { usd = 0, cny = 1, swing = 2 };
inline constexpr std::array<GroupLabel, 3> kGroupLabels{GroupLabel::usd, GroupLabel::cny, GroupLabel::swing};

std::string to_string(GroupLabel label);

struct GroupPartition {
    std::vector<GroupLabel> labels;
    std::array<std::size_t, 3> counts{};
    /// Share of sum_c (M_c + M*_c) held by each group.
    std::array<double, 3> volume_share{};

    std::size_t count(GroupLabel g) const { return counts[static_cast<int>(g)]; }
    double volume(GroupLabel g) const { return volume_share[static_cast<int>(g)]; }
};

/// USD if P_$ = 1 over all converged runs, CNY if 0, SWING otherwise.
GroupPartition classify_groups(const BistabilityScan& scan, const TradeNetwork& net);

struct TimeSeriesRow {
    int year = 0;
    GroupLabel label = GroupLabel::usd;
    double country_fraction = 0.0;
    double volume_fraction = 0.0;
};

/// Rows sorted by year, then by label name (CNY, SWING, USD).
std::vector<TimeSeriesRow> group_time_series(const std::map<int, GroupPartition>& partitions);

}  // namespace wtn
