#include "wtn/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wtn/centrality.hpp"
#include "wtn/clustering.hpp"
#include "wtn/ensemble.hpp"
#include "wtn/error.hpp"
#include "wtn/io.hpp"
#include "wtn/trade_network.hpp"

namespace wtn {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string input;
    std::string registry;
    std::optional<int> year;
    std::vector<int> years;
    std::uint64_t seed = 1;
    std::size_t runs = 10000;
    std::string grid = "0:0.01:1";
    int tau_max = 10;
    std::vector<std::string> anchors_usd{"US"};
    std::vector<std::string> anchors_cny{"CN"};
    std::string weights = "trade";
    double alpha = 0.5;
    std::string out_dir;
    unsigned workers = 0;
    std::string sweep_order = "permutation";
    std::optional<double> cluster_tol;
    std::size_t top_k = 5;
    double f_i = 0.5;
    std::string init_spins;
    std::size_t min_cluster_size = 4;
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
        if (parts.size() != 3) throw Error("--grid range must be start:step:stop");
        const double start = parts[0], step = parts[1], stop = parts[2];
        if (!(step > 0.0) || stop < start) throw Error("--grid range needs step > 0 and stop >= start");
        const auto intervals = static_cast<long long>(std::llround((stop - start) / step));
        if (intervals == 0) return {start};
        // Interpolate endpoints so that 0:0.01:1 yields exactly i/100.
        for (long long i = 0; i <= intervals; ++i) {
            const double t = static_cast<double>(i);
            const double n = static_cast<double>(intervals);
            grid.push_back((start * (n - t) + stop * t) / n);
        }
        return grid;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) grid.push_back(std::stod(item));
    }
    return grid;
}

int resolve_year(const Options& opt) {
    if (opt.year) return *opt.year;
    const auto years = available_years(opt.input);
    if (years.size() == 1) return years.front();
    throw Error("--year is required: the input contains " + std::to_string(years.size()) + " years");
}

IngestResult load(const Options& opt, int year, std::ostream& err) {
    if (opt.input.empty()) throw Error("--input is required");
    std::optional<fs::path> registry;
    if (!opt.registry.empty()) registry = opt.registry;
    IngestResult res = ingest_flows(opt.input, year, registry);
    if (res.report.self_loops_dropped > 0) {
        err << "warning: dropped " << res.report.self_loops_dropped << " self-trade row(s) for " << year << '\n';
    }
    return res;
}

ExperimentConfig make_config(const Options& opt) {
    ExperimentConfig cfg;
    cfg.f_i_grid = parse_grid(opt.grid);
    cfg.n_runs = opt.runs;
    cfg.tau_max = opt.tau_max;
    cfg.master_seed = opt.seed;
    cfg.anchors = {opt.anchors_usd, opt.anchors_cny};
    cfg.weight_mode = opt.weights == "centrality" ? WeightMode::centrality : WeightMode::trade_probability;
    cfg.alpha = opt.alpha;
    cfg.cluster_tol = opt.cluster_tol;
    cfg.order = opt.sweep_order == "replacement" ? SweepOrder::with_replacement : SweepOrder::permutation;
    cfg.workers = opt.workers;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const Options& opt) {
    if (!opt.out_dir.empty()) return opt.out_dir;
    if (const char* env = std::getenv("WTN_OUT_DIR"); env && *env) return env;
    return "out";
}

void cmd_network_stats(const Options& opt, std::ostream& out, std::ostream& err) {
    const int year = resolve_year(opt);
    const auto ingest = load(opt, year, err);
    const TradeNetwork net(ingest.matrix);
    const std::size_t k = std::min(opt.top_k, net.size());
    out << "year: " << year << '\n';
    out << "countries: " << net.size() << '\n';
    out << "total_volume: " << format_sig6(net.M_total()) << '\n';
    out << "rows: read=" << ingest.report.rows_read << " used=" << ingest.report.rows_used
        << " self_loops=" << ingest.report.self_loops_dropped << " other_year=" << ingest.report.rows_other_year
        << " duplicates_merged=" << ingest.report.duplicates_merged << '\n';
    auto table = [&](const char* title, TradeDirection dir, const std::vector<double>& prob) {
        out << title << ":\n";
        const auto top = top_countries(net, dir, k);
        for (std::size_t i = 0; i < top.size(); ++i) {
            out << "  " << (i + 1) << ". " << top[i] << ' ' << format_fixed6(prob[net.table().index_of(top[i])])
                << '\n';
        }
    };
    table("top_import (P)", TradeDirection::import, net.P());
    table("top_export (P*)", TradeDirection::export_, net.P_star());
}

void cmd_relax(const Options& opt, std::ostream& out, std::ostream& err) {
    const int year = resolve_year(opt);
    const auto ingest = load(opt, year, err);
    const TradeNetwork net(ingest.matrix);
    const ExperimentConfig cfg = [&] {
        Options o = opt;
        o.grid = "0.5";
        return make_config(o);
    }();
    const ResolvedAnchors anchors(cfg.anchors, net.table());
    Rng rng(derive_seed(opt.seed, 0, 0));
    std::optional<SpinConfig> initial;
    if (!opt.init_spins.empty()) {
        std::ifstream in(opt.init_spins);
        if (!in) throw Error("cannot open " + opt.init_spins);
        initial = read_spins_csv(in, net.table(), anchors);
    } else {
        initial = random_initial_config(opt.f_i, anchors, rng);
    }
    const auto w = weights_for(cfg, net);
    const auto result = relax(net, w, anchors, *initial, rng, {cfg.tau_max, cfg.order});
    const fs::path dir = out_dir(opt);
    write_trajectory_csv(result, dir / "trajectory.csv");
    write_spins_csv(result.final, net.table(), dir / "final_spins.csv");
    out << "converged: " << (result.converged ? "true" : "false") << '\n';
    out << "tau_stop: " << result.tau_stop << '\n';
    out << "f_f: " << format_fixed6(result.final.usd_fraction()) << '\n';
}

struct ScanOutcome {
    TradeNetwork net;
    ExperimentConfig cfg;
    BistabilityScan scan;
    GroupPartition groups;
};

ScanOutcome scan_year(const Options& opt, int year, std::ostream& err) {
    const auto ingest = load(opt, year, err);
    TradeNetwork net(ingest.matrix);
    ExperimentConfig cfg = make_config(opt);
    BistabilityScan scan = run_scan(cfg, net);
    if (scan.nonconverged_runs > 0) {
        err << "warning: " << scan.nonconverged_runs << " run(s) did not converge within tau_max=" << cfg.tau_max
            << '\n';
    }
    GroupPartition groups = classify_groups(scan, net);
    return {std::move(net), std::move(cfg), std::move(scan), std::move(groups)};
}

void print_groups(const GroupPartition& g, std::ostream& out) {
    for (GroupLabel label : kGroupLabels) {
        out << to_string(label) << ": " << g.count(label) << " countries, volume share "
            << format_fixed6(g.volume(label)) << '\n';
    }
}

void cmd_scan(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto res = scan_year(opt, resolve_year(opt), err);
    const auto files = emit_scan(res.scan, res.groups, res.cfg, out_dir(opt));
    out << "wrote " << files.scan_csv.string() << ", " << files.countries_csv.string() << ", "
        << files.countries_by_fi_csv.string() << ", " << files.summary_json.string() << '\n';
}

void cmd_groups(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto res = scan_year(opt, resolve_year(opt), err);
    const fs::path path = out_dir(opt) / "groups.csv";
    write_groups_csv(res.groups, res.scan, path);
    print_groups(res.groups, out);
    out << "wrote " << path.string() << '\n';
}

void cmd_timeseries(const Options& opt, std::ostream& out, std::ostream& err) {
    if (opt.input.empty()) throw Error("--input is required");
    std::vector<int> years = opt.years;
    if (years.empty() && opt.year) years.push_back(*opt.year);
    if (years.empty()) years = available_years(opt.input);
    std::map<int, GroupPartition> partitions;
    const fs::path dir = out_dir(opt);
    for (int year : years) {
        auto res = scan_year(opt, year, err);
        write_groups_csv(res.groups, res.scan, dir / ("groups_" + std::to_string(year) + ".csv"));
        partitions.emplace(year, std::move(res.groups));
    }
    const auto rows = group_time_series(partitions);
    write_timeseries_csv(rows, dir / "timeseries.csv");
    for (const auto& r : rows) {
        out << r.year << ' ' << to_string(r.label) << " countries=" << format_fixed6(r.country_fraction)
            << " volume=" << format_fixed6(r.volume_fraction) << '\n';
    }
}

void cmd_centrality(const Options& opt, std::ostream& out, std::ostream& err) {
    const auto ingest = load(opt, resolve_year(opt), err);
    const TradeNetwork net(ingest.matrix);
    const auto pr = pagerank(net, opt.alpha);
    const auto cr = cheirank(net, opt.alpha);
    const fs::path path = out_dir(opt) / "centrality.csv";
    write_centrality_csv(net.table(), pr, cr, path);
    out << "pagerank iterations: " << pr.iterations << ", cheirank iterations: " << cr.iterations << '\n';
    out << "wrote " << path.string() << '\n';
}

void cmd_cluster(const Options& opt, std::ostream& out, std::ostream& err) {
    const int year = resolve_year(opt);
    const auto ingest = load(opt, year, err);
    const TradeNetwork net(ingest.matrix);
    ClusterPartition part = louvain(ingest.matrix, opt.seed);
    part.leaders = label_leaders(part, net);
    const fs::path dir = out_dir(opt);
    write_clusters_csv(part, net.table(), dir / "clusters.csv");

    nlohmann::ordered_json j;
    j["year"] = year;
    j["seed"] = opt.seed;
    j["modularity"] = std::stod(format_fixed6(part.modularity));
    j["n_communities"] = part.n_communities;
    j["pass_modularity"] = nlohmann::ordered_json::array();
    for (double q : part.pass_modularity) j["pass_modularity"].push_back(std::stod(format_fixed6(q)));
    j["clusters"] = nlohmann::ordered_json::array();
    for (const auto& row : summarize_clusters(part, net.table(), opt.min_cluster_size)) {
        nlohmann::ordered_json r;
        r["label"] = row.label;
        r["size"] = row.size;
        j["clusters"].push_back(std::move(r));
        out << row.label << ": " << row.size << " countries\n";
    }
    std::ofstream f(dir / "cluster_summary.json", std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + (dir / "cluster_summary.json").string());
    f << j.dump(2) << '\n';
    out << "modularity: " << format_fixed6(part.modularity) << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"World trade network currency preference simulator"};
    app.name(args.empty() ? "wtn" : fs::path(args[0]).filename().string());
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file whose keys mirror the long flag names");

    Options opt;
    app.add_option("--input", opt.input, "Flow CSV with header year,exporter,importer,value_usd");
    app.add_option("--registry", opt.registry, "Optional country registry CSV (iso[,name])");
    app.add_option("--year", opt.year, "Year to select from the input");
    app.add_option("--years", opt.years, "Years for timeseries (default: all in the input)")->delimiter(',');
    app.add_option("--seed", opt.seed, "Master seed for all randomized steps")->capture_default_str();
    app.add_option("--runs", opt.runs, "Runs per grid point")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--grid", opt.grid, "f_i grid: start:step:stop or comma list")->capture_default_str();
    app.add_option("--tau-max", opt.tau_max, "Sweep budget per relaxation")->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--anchors-usd", opt.anchors_usd, "Countries pinned to USD")->delimiter(',')->capture_default_str();
    app.add_option("--anchors-cny", opt.anchors_cny, "Countries pinned to CNY")->delimiter(',')->capture_default_str();
    app.add_option("--weights", opt.weights, "Coupling weights")->check(CLI::IsMember({"trade", "centrality"}))
        ->capture_default_str();
    app.add_option("--alpha", opt.alpha, "Google matrix damping factor")->capture_default_str();
    app.add_option("--out-dir", opt.out_dir, "Output directory (default: $WTN_OUT_DIR or ./out)");
    app.add_option("--workers", opt.workers, "Worker threads, 0 = all cores")->capture_default_str();
    app.add_option("--sweep-order", opt.sweep_order, "Spin visit order within a sweep")
        ->check(CLI::IsMember({"permutation", "replacement"}))->capture_default_str();
    app.add_option("--cluster-tol", opt.cluster_tol, "Attractor merge tolerance (default 0.5/N)");

    auto* network = app.add_subcommand("network", "Trade network summaries");
    network->fallthrough();
    network->require_subcommand(1);
    auto* stats = network->add_subcommand("stats", "Country count, total volume, top-k tables");
    stats->fallthrough();
    stats->add_option("--top-k", opt.top_k, "Rows in the top tables")->capture_default_str();

    auto* relax_cmd = app.add_subcommand("relax", "Single relaxation, writes trajectory.csv");
    relax_cmd->fallthrough();
    relax_cmd->add_option("--f-i", opt.f_i, "Initial USD fraction of free countries")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    relax_cmd->add_option("--init-spins", opt.init_spins, "Initial configuration CSV (iso,sigma)");

    auto* scan_cmd = app.add_subcommand("scan", "Bistability scan over the f_i grid");
    scan_cmd->fallthrough();
    auto* groups_cmd = app.add_subcommand("groups", "USD/CNY/SWING classification");
    groups_cmd->fallthrough();
    auto* ts_cmd = app.add_subcommand("timeseries", "Group sizes across years");
    ts_cmd->fallthrough();
    auto* centrality_cmd = app.add_subcommand("centrality", "PageRank and CheiRank per country");
    centrality_cmd->fallthrough();
    auto* cluster_cmd = app.add_subcommand("cluster", "Directed Louvain communities with leaders");
    cluster_cmd->fallthrough();
    cluster_cmd->add_option("--min-cluster-size", opt.min_cluster_size, "Smaller communities go to Others")
        ->capture_default_str();

    try {
        std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
        std::reverse(rev.begin(), rev.end());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) {
            err << app.help();
        }
        return app.exit(e, out, err);
    }

    try {
        if (*stats) cmd_network_stats(opt, out, err);
        else if (*relax_cmd) cmd_relax(opt, out, err);
        else if (*scan_cmd) cmd_scan(opt, out, err);
        else if (*groups_cmd) cmd_groups(opt, out, err);
        else if (*ts_cmd) cmd_timeseries(opt, out, err);
        else if (*centrality_cmd) cmd_centrality(opt, out, err);
        else if (*cluster_cmd) cmd_cluster(opt, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace wtn
