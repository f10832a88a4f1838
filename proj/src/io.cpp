#include "wtn/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "wtn/error.hpp"

namespace wtn {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

int parse_int(std::string_view s, std::size_t line, const char* what) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(std::string("invalid ") + what, line);
    return v;
}

double parse_double(std::string_view s, std::size_t line, const char* what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(std::string("invalid ") + what, line);
    return v;
}

// Reads lines, strips a trailing '\r', skips blank lines. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& number) {
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) return true;
    }
    return false;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

std::vector<FlowRecord> read_flow_records(std::istream& in) {
    std::string line;
    std::size_t number = 0;
    if (!next_line(in, line, number)) throw ParseError("empty flow file", 1);
    const auto header = split_csv(line);
    const std::vector<std::string> expected{"year", "exporter", "importer", "value_usd"};
    if (header.size() != expected.size() ||
        !std::equal(header.begin(), header.end(), expected.begin(),
                    [](std::string_view a, const std::string& b) { return lower(a) == b; })) {
        throw ParseError("expected header 'year,exporter,importer,value_usd'", number);
    }
    std::vector<FlowRecord> records;
    while (next_line(in, line, number)) {
        const auto cells = split_csv(line);
        if (cells.size() != 4) throw ParseError("expected 4 columns, got " + std::to_string(cells.size()), number);
        FlowRecord rec;
        rec.year = parse_int(cells[0], number, "year");
        rec.exporter = normalize_iso(cells[1]);
        rec.importer = normalize_iso(cells[2]);
        if (rec.exporter.empty()) throw ParseError("invalid exporter code", number);
        if (rec.importer.empty()) throw ParseError("invalid importer code", number);
        rec.value = parse_double(cells[3], number, "value");
        if (!std::isfinite(rec.value) || rec.value < 0.0) throw ParseError("value must be finite and >= 0", number);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<std::pair<std::string, std::string>> read_registry(std::istream& in) {
    std::string line;
    std::size_t number = 0;
    if (!next_line(in, line, number)) throw ParseError("empty registry file", 1);
    const auto header = split_csv(line);
    if (header.empty() || lower(header[0]) != "iso" || header.size() > 2) {
        throw ParseError("expected registry header 'iso' or 'iso,name'", number);
    }
    std::vector<std::pair<std::string, std::string>> out;
    while (next_line(in, line, number)) {
        const auto cells = split_csv(line);
        if (cells.size() > header.size()) throw ParseError("too many registry columns", number);
        std::string iso = normalize_iso(cells[0]);
        if (iso.empty()) throw ParseError("invalid country code", number);
        out.emplace_back(std::move(iso), cells.size() > 1 ? std::string(cells[1]) : std::string{});
    }
    return out;
}

IngestResult ingest_flows(std::istream& flows, int year, std::istream* registry) {
    const auto records = read_flow_records(flows);
    IngestReport report;
    report.rows_read = records.size();

    std::set<std::string> codes;
    std::vector<const FlowRecord*> selected;
    for (const auto& rec : records) {
        if (rec.year != year) {
            ++report.rows_other_year;
            continue;
        }
        if (rec.exporter == rec.importer) {
            ++report.self_loops_dropped;
            continue;
        }
        codes.insert(rec.exporter);
        codes.insert(rec.importer);
        selected.push_back(&rec);
    }
    if (selected.empty()) throw Error("no usable flows for year " + std::to_string(year));

    std::map<std::string, std::string> names;
    if (registry) {
        for (auto& [iso, name] : read_registry(*registry)) {
            codes.insert(iso);
            names[iso] = name;
        }
    }

    std::vector<std::string> isos(codes.begin(), codes.end());
    std::vector<std::string> labels;
    labels.reserve(isos.size());
    for (const auto& iso : isos) labels.push_back(names.count(iso) ? names[iso] : std::string{});
    CountryTable table(isos, labels);

    DenseMatrix values(table.size());
    std::vector<std::uint8_t> seen(table.size() * table.size(), 0);
    for (const FlowRecord* rec : selected) {
        const auto from = table.index_of(rec->exporter);
        const auto to = table.index_of(rec->importer);
        auto& mark = seen[to * table.size() + from];
        if (mark) ++report.duplicates_merged;
        mark = 1;
        values(to, from) += rec->value;
        ++report.rows_used;
    }
    return {MoneyMatrix(year, std::move(table), std::move(values)), report};
}

IngestResult ingest_flows(const fs::path& path, int year, const std::optional<fs::path>& registry) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open flow file " + path.string());
    if (registry) {
        std::ifstream reg(*registry);
        if (!reg) throw Error("cannot open registry file " + registry->string());
        return ingest_flows(in, year, &reg);
    }
    return ingest_flows(in, year, nullptr);
}

std::vector<int> available_years(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open flow file " + path.string());
    std::set<int> years;
    for (const auto& rec : read_flow_records(in)) years.insert(rec.year);
    return {years.begin(), years.end()};
}

std::string format_fixed6(double x) {
    if (x == 0.0) x = 0.0;  // drop the sign of -0.0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

std::string format_sig6(double x) {
    if (x == 0.0) x = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

namespace {

// JSON number carrying exactly the digits printed by format_fixed6.
double rounded(double x) { return std::stod(format_fixed6(x)); }

std::string weight_mode_name(WeightMode m) {
    return m == WeightMode::centrality ? "centrality" : "trade";
}

}  // namespace

ScanFiles emit_scan(const BistabilityScan& scan, const GroupPartition& groups, const ExperimentConfig& cfg,
                    const fs::path& out_dir) {
    if (scan.points.empty()) throw Error("emit_scan: scan has no grid points");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir)) throw Error("cannot create output directory " + out_dir.string());

    ScanFiles files{out_dir / "scan.csv", out_dir / "countries.csv", out_dir / "countries_by_fi.csv",
                    out_dir / "summary.json"};

    {
        auto out = open_out(files.scan_csv);
        out << "f_i,f_f,rho,nonconverged\n";
        for (const auto& pt : scan.points) {
            if (pt.attractors.empty()) {
                out << format_fixed6(pt.f_i) << ",," << format_fixed6(0.0) << ',' << pt.nonconverged << '\n';
            }
            for (const auto& a : pt.attractors) {
                out << format_fixed6(pt.f_i) << ',' << format_fixed6(a.f_f) << ',' << format_fixed6(a.rho) << ','
                    << pt.nonconverged << '\n';
            }
        }
        finish(out, files.scan_csv);
    }
    {
        auto out = open_out(files.countries_csv);
        out << "iso,p_dollar,group\n";
        for (CountryIndex c = 0; c < scan.table.size(); ++c) {
            out << scan.table.iso(c) << ',' << format_fixed6(scan.p_dollar[c]) << ','
                << to_string(groups.labels.at(c)) << '\n';
        }
        finish(out, files.countries_csv);
    }
    {
        auto out = open_out(files.countries_by_fi_csv);
        out << "iso,f_i,p_dollar\n";
        for (CountryIndex c = 0; c < scan.table.size(); ++c) {
            for (const auto& pt : scan.points) {
                out << scan.table.iso(c) << ',' << format_fixed6(pt.f_i) << ',' << format_fixed6(pt.p_dollar(c))
                    << '\n';
            }
        }
        finish(out, files.countries_by_fi_csv);
    }
    {
        nlohmann::ordered_json j;
        nlohmann::ordered_json config;
        config["n_countries"] = scan.table.size();
        config["grid"] = nlohmann::ordered_json::array();
        for (double f : cfg.f_i_grid) config["grid"].push_back(rounded(f));
        config["runs"] = cfg.n_runs;
        config["tau_max"] = cfg.tau_max;
        config["seed"] = cfg.master_seed;
        config["anchors_usd"] = cfg.anchors.usd_fixed;
        config["anchors_cny"] = cfg.anchors.cny_fixed;
        config["weights"] = weight_mode_name(cfg.weight_mode);
        if (cfg.weight_mode == WeightMode::centrality) config["alpha"] = rounded(cfg.alpha);
        config["sweep_order"] = cfg.order == SweepOrder::permutation ? "permutation" : "with_replacement";
        j["config"] = std::move(config);

        // Attractors merged over the grid, keyed by USD-count range.
        std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> merged;
        for (const auto& pt : scan.points) {
            for (const auto& a : pt.attractors) {
                auto& slot = merged[{a.usd_count_min, a.usd_count_max}];
                slot.first = a.f_f;
                slot.second += a.runs;
            }
        }
        nlohmann::ordered_json attractors = nlohmann::ordered_json::array();
        for (const auto& [range, info] : merged) {
            nlohmann::ordered_json a;
            a["f_f"] = rounded(info.first);
            a["runs"] = info.second;
            attractors.push_back(std::move(a));
        }
        j["attractors"] = std::move(attractors);
        j["converged_runs"] = scan.converged_runs;
        j["nonconverged_runs"] = scan.nonconverged_runs;
        nlohmann::ordered_json counts;
        nlohmann::ordered_json volume;
        for (GroupLabel g : kGroupLabels) {
            counts[to_string(g)] = groups.count(g);
            volume[to_string(g)] = rounded(groups.volume(g));
        }
        j["group_counts"] = std::move(counts);
        j["group_volume_share"] = std::move(volume);

        auto out = open_out(files.summary_json);
        out << j.dump(2) << '\n';
        finish(out, files.summary_json);
    }
    return files;
}

void write_trajectory_csv(const RelaxationResult& result, const fs::path& path) {
    auto out = open_out(path);
    out << "tau,f\n";
    for (const auto& pt : result.trajectory) out << pt.tau << ',' << format_fixed6(pt.f) << '\n';
    finish(out, path);
}

void write_spins_csv(const SpinConfig& spins, const CountryTable& table, const fs::path& path) {
    auto out = open_out(path);
    out << "iso,sigma\n";
    for (CountryIndex c = 0; c < table.size(); ++c) out << table.iso(c) << ',' << int(spins[c]) << '\n';
    finish(out, path);
}

SpinConfig read_spins_csv(std::istream& in, const CountryTable& table, const ResolvedAnchors& anchors, Spin fill) {
    std::string line;
    std::size_t number = 0;
    if (!next_line(in, line, number)) throw ParseError("empty spin file", 1);
    const auto header = split_csv(line);
    if (header.size() != 2 || lower(header[0]) != "iso" || lower(header[1]) != "sigma") {
        throw ParseError("expected header 'iso,sigma'", number);
    }
    SpinConfig spins(anchors, fill);
    while (next_line(in, line, number)) {
        const auto cells = split_csv(line);
        if (cells.size() != 2) throw ParseError("expected 2 columns", number);
        const auto idx = table.find(cells[0]);
        if (!idx) throw ParseError("unknown country code '" + std::string(cells[0]) + "'", number);
        const int s = parse_int(cells[1], number, "spin");
        if (s != -1 && s != 1) throw ParseError("spin must be -1 or 1", number);
        if (spins.is_fixed(*idx) && s != spins[*idx]) throw ParseError("spin contradicts anchor", number);
        spins.set(*idx, static_cast<Spin>(s));
    }
    return spins;
}

void write_groups_csv(const GroupPartition& groups, const BistabilityScan& scan, const fs::path& path) {
    auto out = open_out(path);
    out << "iso,group,p_dollar\n";
    for (CountryIndex c = 0; c < scan.table.size(); ++c) {
        out << scan.table.iso(c) << ',' << to_string(groups.labels.at(c)) << ','
            << format_fixed6(scan.p_dollar.at(c)) << '\n';
    }
    finish(out, path);
}

void write_timeseries_csv(const std::vector<TimeSeriesRow>& rows, const fs::path& path) {
    auto out = open_out(path);
    out << "year,label,country_fraction,volume_fraction\n";
    for (const auto& r : rows) {
        out << r.year << ',' << to_string(r.label) << ',' << format_fixed6(r.country_fraction) << ','
            << format_fixed6(r.volume_fraction) << '\n';
    }
    finish(out, path);
}

void write_centrality_csv(const CountryTable& table, const CentralityVector& pagerank,
                          const CentralityVector& cheirank, const fs::path& path) {
    auto out = open_out(path);
    out << "iso,pagerank,cheirank\n";
    for (CountryIndex c = 0; c < table.size(); ++c) {
        out << table.iso(c) << ',' << format_sig6(pagerank.values.at(c)) << ','
            << format_sig6(cheirank.values.at(c)) << '\n';
    }
    finish(out, path);
}

void write_clusters_csv(const ClusterPartition& partition, const CountryTable& table, const fs::path& path) {
    auto out = open_out(path);
    out << "iso,community,leader\n";
    for (CountryIndex c = 0; c < table.size(); ++c) {
        const auto comm = partition.community.at(c);
        out << table.iso(c) << ',' << comm << ',' << table.iso(partition.leaders.at(comm)) << '\n';
    }
    finish(out, path);
}

}  // namespace wtn
