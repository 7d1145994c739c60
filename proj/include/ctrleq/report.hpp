#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctrleq/io.hpp"

namespace ctrleq {

/// One reduction summary: sizes of the original and reduced networks and
/// their driver sets, plus per-stage wall times. Failed rows keep the name
/// and the error, with empty numeric columns in the CSV.
struct ReportRow {
  std::string name;
  bool failed = false;
  std::string error;
  std::size_t nodes = 0;            // N
  std::size_t reduced_nodes = 0;    // n
  std::size_t drivers = 0;          // K
  std::size_t reduced_drivers = 0;  // k
  double parse_ms = 0.0;
  double drivers_ms = 0.0;
  double refine_ms = 0.0;
  double lump_ms = 0.0;
};

/// Manifest line: name,path,format[,drivers_path][,bounds] with bounds as
/// "lo:hi". format is one of mm, tsv, auto.
struct ManifestEntry {
  std::string name;
  std::filesystem::path path;
  NetworkFormat format = NetworkFormat::Auto;
  std::optional<std::filesystem::path> drivers_path;
  std::optional<std::pair<double, double>> bounds;
};

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path);

/// Runs the full pipeline (parse, drivers, drivers-split refinement, lump)
/// on one network. Never throws: failures are captured in the row.
ReportRow report_row(const ManifestEntry& entry);

/// Processes entries in a worker pool (CTRLEQ_THREADS caps the size, 0 picks
/// the hardware default); rows come back in manifest order.
std::vector<ReportRow> run_report(std::span<const ManifestEntry> entries,
                                  std::size_t threads = 0);

/// CSV with Table-1-style columns: name,N,n,n_over_N,K,k,k_over_K,K_over_N;
/// ratios as percentages with two decimals.
std::string format_report_csv(std::span<const ReportRow> rows);
void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path);

}  // namespace ctrleq
