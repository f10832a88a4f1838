#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wtn/clustering.hpp"
#include "wtn/centrality.hpp"
#include "wtn/ensemble.hpp"
#include "wtn/money_matrix.hpp"
#include "wtn/spin_dynamics.hpp"

namespace wtn {

struct FlowRecord {
    int year = 0;
    std::string exporter;
    std::string importer;
    double value = 0.0;
};

/// Row accounting of one ingestion. Invariant:
/// rows_read == rows_used + self_loops_dropped + rows_other_year.
struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t rows_used = 0;
    std::size_t self_loops_dropped = 0;
    std::size_t rows_other_year = 0;
    /// rows_used that landed on an already populated (exporter, importer) cell.
    std::size_t duplicates_merged = 0;
};

struct IngestResult {
    MoneyMatrix matrix;
    IngestReport report;
};

/// Parses `year,exporter,importer,value_usd` CSV (header required).
/// Throws ParseError with the line number on malformed rows.
std::vector<FlowRecord> read_flow_records(std::istream& in);

/// Optional registry CSV `iso[,name]` with header. Adds countries that
/// may be absent from the flows.
std::vector<std::pair<std::string, std::string>> read_registry(std::istream& in);

IngestResult ingest_flows(std::istream& flows, int year, std::istream* registry = nullptr);
IngestResult ingest_flows(const std::filesystem::path& path, int year,
                          const std::optional<std::filesystem::path>& registry = std::nullopt);

/// Years present in a flow file, ascending.
std::vector<int> available_years(const std::filesystem::path& path);

/// Fixed-point with six decimals, e.g. "1.000000". Negative zero prints as zero.
std::string format_fixed6(double x);
/// Six significant digits, e.g. for volumes.
std::string format_sig6(double x);

struct ScanFiles {
    std::filesystem::path scan_csv;
    std::filesystem::path countries_csv;
    std::filesystem::path countries_by_fi_csv;
    std::filesystem::path summary_json;
};

/// Writes scan.csv (f_i,f_f,rho,nonconverged), countries.csv
/// (iso,p_dollar,group), countries_by_fi.csv (iso,f_i,p_dollar) and
/// summary.json into out_dir. Output is byte-stable for a given scan.
ScanFiles emit_scan(const BistabilityScan& scan, const GroupPartition& groups, const ExperimentConfig& cfg,
                    const std::filesystem::path& out_dir);

void write_trajectory_csv(const RelaxationResult& result, const std::filesystem::path& path);
void write_spins_csv(const SpinConfig& spins, const CountryTable& table, const std::filesystem::path& path);
/// Reads `iso,sigma` rows; countries not listed keep `fill`.
SpinConfig read_spins_csv(std::istream& in, const CountryTable& table, const ResolvedAnchors& anchors,
                          Spin fill = kCny);
void write_groups_csv(const GroupPartition& groups, const BistabilityScan& scan, const std::filesystem::path& path);
void write_timeseries_csv(const std::vector<TimeSeriesRow>& rows, const std::filesystem::path& path);
void write_centrality_csv(const CountryTable& table, const CentralityVector& pagerank,
                          const CentralityVector& cheirank, const std::filesystem::path& path);
void write_clusters_csv(const ClusterPartition& partition, const CountryTable& table,
                        const std::filesystem::path& path);

}  // namespace wtn
