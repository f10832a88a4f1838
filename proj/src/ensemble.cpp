#include "wtn/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "wtn/centrality.hpp"
#include "wtn/error.hpp"

namespace wtn {

void ExperimentConfig::validate() const {
    if (f_i_grid.empty()) throw Error("experiment: f_i grid is empty");
    for (std::size_t i = 0; i < f_i_grid.size(); ++i) {
        const double f = f_i_grid[i];
        if (!(f >= 0.0 && f <= 1.0)) throw Error("experiment: grid values must lie in [0, 1]");
        if (i > 0 && !(f > f_i_grid[i - 1])) throw Error("experiment: grid must be strictly increasing");
    }
    if (n_runs == 0) throw Error("experiment: n_runs must be at least 1");
    if (tau_max < 1) throw Error("experiment: tau_max must be at least 1");
    if (cluster_tol && !(*cluster_tol >= 0.0)) throw Error("experiment: cluster_tol must be non-negative");
    if (weight_mode == WeightMode::centrality && !(alpha > 0.0 && alpha < 1.0)) {
        throw Error("experiment: alpha must lie in (0, 1)");
    }
}

std::vector<double> default_grid() {
    std::vector<double> grid(101);
    for (int i = 0; i <= 100; ++i) grid[static_cast<std::size_t>(i)] = i / 100.0;
    return grid;
}

SpinConfig random_initial_config(double f_i, const ResolvedAnchors& anchors, Rng& rng) {
    if (!(f_i >= 0.0 && f_i <= 1.0)) throw Error("initial fraction must lie in [0, 1]");
    std::vector<CountryIndex> free = anchors.free_indices();
    const auto n_usd = static_cast<std::size_t>(std::llround(f_i * static_cast<double>(free.size())));
    // Partial Fisher-Yates: the first n_usd slots form a uniform subset.
    for (std::size_t i = 0; i < n_usd; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_below(rng, free.size() - i));
        std::swap(free[i], free[j]);
    }
    SpinConfig spins(anchors, kCny);
    for (std::size_t i = 0; i < n_usd; ++i) spins.set(free[i], kUsd);
    return spins;
}

double GridPointResult::p_dollar(CountryIndex c) const {
    const std::size_t conv = converged();
    if (conv == 0) return 0.0;
    return static_cast<double>(usd_final_counts.at(c)) / static_cast<double>(conv);
}

CouplingWeights weights_for(const ExperimentConfig& cfg, const TradeNetwork& net) {
    if (cfg.weight_mode == WeightMode::centrality) return centrality_weights(net, cfg.alpha);
    return trade_probability_weights(net);
}

namespace {

// Integer tallies for one grid point. Summing tallies is associative and
// commutative, which keeps the scan independent of worker scheduling.
struct Tally {
    std::vector<std::size_t> histogram;  // by final USD count, converged runs only
    std::vector<std::size_t> usd_final;  // per country, converged runs only
    std::size_t nonconverged = 0;

    explicit Tally(std::size_t n) : histogram(n + 1, 0), usd_final(n, 0) {}

    void merge(const Tally& other) {
        for (std::size_t i = 0; i < histogram.size(); ++i) histogram[i] += other.histogram[i];
        for (std::size_t i = 0; i < usd_final.size(); ++i) usd_final[i] += other.usd_final[i];
        nonconverged += other.nonconverged;
    }
};

std::vector<Attractor> cluster_attractors(const std::vector<std::size_t>& histogram, std::size_t n, double tol,
                                          std::size_t n_runs) {
    std::vector<Attractor> out;
    const double dn = static_cast<double>(n);
    double weighted = 0.0;
    for (std::size_t count = 0; count < histogram.size(); ++count) {
        const std::size_t runs = histogram[count];
        if (runs == 0) continue;
        const double f = static_cast<double>(count) / dn;
        if (!out.empty() && f - static_cast<double>(out.back().usd_count_max) / dn <= tol) {
            Attractor& a = out.back();
            a.usd_count_max = count;
            a.runs += runs;
            weighted += static_cast<double>(runs) * static_cast<double>(count);
            a.f_f = weighted / static_cast<double>(a.runs) / dn;
            continue;
        }
        weighted = static_cast<double>(runs) * static_cast<double>(count);
        out.push_back({f, count, count, runs, 0.0});
    }
    for (auto& a : out) a.rho = static_cast<double>(a.runs) / static_cast<double>(n_runs);
    return out;
}

}  // namespace

BistabilityScan run_scan(const ExperimentConfig& cfg, const TradeNetwork& net, const CouplingWeights& w) {
    cfg.validate();
    const std::size_t n = net.size();
    const ResolvedAnchors anchors(cfg.anchors, net.table());
    const Coupling coupling(net, w);
    const RelaxOptions relax_opts{cfg.tau_max, cfg.order};
    const double tol = cfg.cluster_tol.value_or(0.5 / static_cast<double>(n));

    const std::size_t n_points = cfg.f_i_grid.size();
    const std::size_t total_runs = n_points * cfg.n_runs;
    unsigned workers = cfg.workers == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.workers;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, total_runs));

    // Work is handed out in fixed chunks of run indices; any worker may take
    // any chunk, each run's stream depends only on (seed, grid, run).
    constexpr std::size_t kChunk = 64;
    std::atomic<std::size_t> next{0};
    std::vector<std::vector<Tally>> per_worker(workers, std::vector<Tally>(n_points, Tally(n)));

    auto work = [&](unsigned id) {
        auto& tallies = per_worker[id];
        for (;;) {
            const std::size_t begin = next.fetch_add(kChunk);
            if (begin >= total_runs) break;
            const std::size_t end = std::min(total_runs, begin + kChunk);
            for (std::size_t job = begin; job < end; ++job) {
                const std::size_t g = job / cfg.n_runs;
                const std::size_t r = job % cfg.n_runs;
                Rng rng(derive_seed(cfg.master_seed, g, r));
                const SpinConfig init = random_initial_config(cfg.f_i_grid[g], anchors, rng);
                const RelaxationResult res = relax(coupling, anchors, init, rng, relax_opts);
                Tally& t = tallies[g];
                if (!res.converged) {
                    ++t.nonconverged;
                    continue;
                }
                std::size_t usd = 0;
                for (CountryIndex c = 0; c < n; ++c) {
                    if (res.final[c] == kUsd) {
                        ++t.usd_final[c];
                        ++usd;
                    }
                }
                ++t.histogram[usd];
            }
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned id = 0; id < workers; ++id) pool.emplace_back(work, id);
    }

    BistabilityScan scan;
    scan.table = net.table();
    scan.points.reserve(n_points);
    std::vector<std::size_t> usd_total(n, 0);
    for (std::size_t g = 0; g < n_points; ++g) {
        Tally t(n);
        for (const auto& worker : per_worker) t.merge(worker[g]);
        GridPointResult point;
        point.f_i = cfg.f_i_grid[g];
        point.runs = cfg.n_runs;
        point.nonconverged = t.nonconverged;
        point.attractors = cluster_attractors(t.histogram, n, tol, cfg.n_runs);
        point.usd_final_counts = std::move(t.usd_final);
        for (CountryIndex c = 0; c < n; ++c) usd_total[c] += point.usd_final_counts[c];
        scan.converged_runs += point.converged();
        scan.nonconverged_runs += point.nonconverged;
        scan.points.push_back(std::move(point));
    }
    scan.p_dollar.assign(n, 0.0);
    if (scan.converged_runs > 0) {
        for (CountryIndex c = 0; c < n; ++c) {
            scan.p_dollar[c] = static_cast<double>(usd_total[c]) / static_cast<double>(scan.converged_runs);
        }
    } else {
        // Without a converged run only the anchors are known.
        for (CountryIndex c = 0; c < n; ++c) scan.p_dollar[c] = anchors.pinned(c) == kUsd ? 1.0 : 0.0;
    }
    return scan;
}

BistabilityScan run_scan(const ExperimentConfig& cfg, const TradeNetwork& net) {
    return run_scan(cfg, net, weights_for(cfg, net));
}

std::string to_string(GroupLabel label) {
    switch (label) {
        case GroupLabel::usd: return "USD";
        case GroupLabel::cny: return "CNY";
        case GroupLabel::swing: return "SWING";
    }
    return "?";
}

GroupPartition classify_groups(const BistabilityScan& scan, const TradeNetwork& net) {
    const std::size_t n = net.size();
    if (scan.p_dollar.size() != n) throw Error("classify_groups: scan and network sizes differ");
    GroupPartition out;
    out.labels.resize(n);
    std::array<double, 3> volume{};
    double total = 0.0;
    for (CountryIndex c = 0; c < n; ++c) {
        const double p = scan.p_dollar[c];
        GroupLabel label = GroupLabel::swing;
        if (p == 1.0) label = GroupLabel::usd;
        else if (p == 0.0) label = GroupLabel::cny;
        out.labels[c] = label;
        const auto g = static_cast<std::size_t>(label);
        ++out.counts[g];
        const double v = net.M_in()[c] + net.M_out()[c];
        volume[g] += v;
        total += v;
    }
    for (std::size_t g = 0; g < 3; ++g) out.volume_share[g] = volume[g] / total;
    return out;
}

std::vector<TimeSeriesRow> group_time_series(const std::map<int, GroupPartition>& partitions) {
    if (partitions.empty()) throw Error("group_time_series: no years given");
    std::vector<GroupLabel> by_name(kGroupLabels.begin(), kGroupLabels.end());
    std::sort(by_name.begin(), by_name.end(),
              [](GroupLabel a, GroupLabel b) { return to_string(a) < to_string(b); });
    std::vector<TimeSeriesRow> rows;
    for (const auto& [year, part] : partitions) {
        const double n = static_cast<double>(part.labels.size());
        for (GroupLabel g : by_name) {
            rows.push_back({year, g, static_cast<double>(part.count(g)) / n, part.volume(g)});
        }
    }
    return rows;
}

}  // namespace wtn
