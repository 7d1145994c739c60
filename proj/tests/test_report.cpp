#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "ctrleq/error.hpp"
#include "ctrleq/report.hpp"

using namespace ctrleq;

namespace {

std::filesystem::path data_dir() { return std::filesystem::path(CTRLEQ_TEST_DATA); }

const ReportRow* find_row(const std::vector<ReportRow>& rows, const std::string& name) {
  for (const ReportRow& row : rows) {
    if (row.name == name) return &row;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("manifest parsing resolves relative paths, drivers and bounds") {
  auto entries = parse_manifest(data_dir() / "manifest.csv");
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].name == "fig1");
  CHECK(entries[0].format == NetworkFormat::TsvEdgeList);
  REQUIRE(entries[0].drivers_path.has_value());
  CHECK(std::filesystem::exists(*entries[0].drivers_path));
  REQUIRE(entries[0].bounds.has_value());
  CHECK(entries[0].bounds->first == 1.0);
  CHECK(entries[0].bounds->second == 4.0);
  CHECK(entries[1].format == NetworkFormat::MatrixMarket);
  CHECK(!entries[1].drivers_path.has_value());
}

TEST_CASE("the fixture networks reduce to the expected sizes") {
  auto rows = run_report(parse_manifest(data_dir() / "manifest.csv"), 2);
  REQUIRE(rows.size() == 3);

  const ReportRow* fig1 = find_row(rows, "fig1");
  REQUIRE(fig1);
  CHECK(!fig1->failed);
  CHECK(fig1->nodes == 3);
  CHECK(fig1->reduced_nodes == 2);
  CHECK(fig1->drivers == 2);
  CHECK(fig1->reduced_drivers == 1);

  // all nodes are drivers, so the drivers split is one block and the zero
  // matrix never splits it
  const ReportRow* edgeless = find_row(rows, "edgeless5");
  REQUIRE(edgeless);
  CHECK(!edgeless->failed);
  CHECK(edgeless->nodes == 5);
  CHECK(edgeless->reduced_nodes == 1);
  CHECK(edgeless->drivers == 5);
  CHECK(edgeless->reduced_drivers == 1);

  const ReportRow* chain = find_row(rows, "chain3");
  REQUIRE(chain);
  CHECK(chain->drivers == 1);

  for (const ReportRow& row : rows) {
    if (row.failed) continue;
    CHECK(row.reduced_nodes <= row.nodes);
    CHECK(row.reduced_drivers <= row.drivers);
    CHECK(row.reduced_drivers <= row.reduced_nodes);
  }
}

TEST_CASE("report CSV formatting matches the published table style") {
  ReportRow row;
  row.name = "seagrass";
  row.nodes = 50;
  row.reduced_nodes = 43;
  row.drivers = 13;
  row.reduced_drivers = 8;
  std::string csv = format_report_csv(std::vector<ReportRow>{row});
  CHECK(csv ==
        "name,N,n,n_over_N,K,k,k_over_K,K_over_N\n"
        "seagrass,50,43,86.00,13,8,61.54,26.00\n");

  CHECK(format_report_csv({}) == "name,N,n,n_over_N,K,k,k_over_K,K_over_N\n");
}

TEST_CASE("reports are deterministic across runs and thread counts") {
  auto entries = parse_manifest(data_dir() / "manifest.csv");
  std::string first = format_report_csv(run_report(entries, 1));
  std::string second = format_report_csv(run_report(entries, 2));
  std::string third = format_report_csv(run_report(entries, 2));
  CHECK(first == second);
  CHECK(second == third);
}

TEST_CASE("failures are isolated per row") {
  std::vector<ManifestEntry> entries(2);
  entries[0].name = "missing";
  entries[0].path = "does/not/exist.tsv";
  entries[1].name = "fig1";
  entries[1].path = data_dir() / "fig1.tsv";

  auto rows = run_report(entries, 2);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].failed);
  CHECK(!rows[0].error.empty());
  CHECK(!rows[1].failed);

  std::string csv = format_report_csv(rows);
  CHECK(csv.find("missing,,,,,,,\n") != std::string::npos);
}

TEST_CASE("malformed manifests are rejected") {
  CHECK_THROWS_AS(parse_manifest(data_dir() / "no-such-manifest.csv"), IoError);
}

TEST_CASE("CTRLEQ_THREADS caps the worker pool without changing results") {
  auto entries = parse_manifest(data_dir() / "manifest.csv");
  std::string unlimited = format_report_csv(run_report(entries, 2));
  setenv("CTRLEQ_THREADS", "1", 1);
  std::string capped = format_report_csv(run_report(entries, 0));
  unsetenv("CTRLEQ_THREADS");
  CHECK(capped == unlimited);
}
