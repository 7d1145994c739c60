#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ctrleq/control.hpp"
#include "ctrleq/partition.hpp"
#include "ctrleq/reduced_system.hpp"
#include "ctrleq/sim.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

enum class NetworkFormat { Auto, MatrixMarket, TsvEdgeList };

/// Bijection between original node labels and the dense 0-based index space.
struct Remap {
  std::vector<std::string> labels;  // index -> original label
  std::unordered_map<std::string, NodeId> index;

  NodeId require(const std::string& label) const;
  NodeId intern(const std::string& label);
  std::size_t size() const { return labels.size(); }
};

struct ParsedNetwork {
  SparseMatrix matrix;
  Remap remap;
};

struct ParseOptions {
  NetworkFormat format = NetworkFormat::Auto;
  bool symmetrize = false;  // also add the reversed edge for every record
};

/// Parses a Matrix Market coordinate file or a TSV edge list. Edge records
/// src -> dst set A(dst, src); duplicates are summed; missing weights
/// default to 1. Matrix Market entries (i, j, v) set A(i, j) directly.
/// Node labels are interned in order of first appearance (TSV) or as
/// "1".."N" (Matrix Market).
ParsedNetwork parse_network(const std::filesystem::path& path, const ParseOptions& opts = {});
ParsedNetwork parse_network_text(std::string_view text, std::string_view name,
                                 const ParseOptions& opts = {});

/// Partition file: one block per line, whitespace-separated original labels.
/// Blank lines and lines starting with '#' or '%' are skipped. The single
/// directive `@drivers-split` expands to {drivers, rest} and requires the
/// driver set.
Partition parse_partition(const std::filesystem::path& path, const Remap& remap,
                          std::span<const NodeId> drivers = {});
Partition parse_partition_text(std::string_view text, std::string_view name, const Remap& remap,
                               std::span<const NodeId> drivers = {});
void write_partition(const Partition& partition, const Remap& remap,
                     const std::filesystem::path& path);

/// Whitespace-separated original labels; used for externally supplied
/// driver sets.
std::vector<NodeId> parse_node_list(const std::filesystem::path& path, const Remap& remap);

/// Serialization-level image of a reduced system: labels instead of node
/// indices, dense row-major Â.
struct ReducedSystemRecord {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> a_hat;                          // n*n row-major
  std::vector<std::size_t> driver_blocks;             // block index of B̂ column l
  std::vector<double> m_hat, big_m_hat;               // macro-input bounds
  std::vector<std::vector<std::string>> blocks;       // original labels per block
  std::vector<std::vector<std::string>> control_groups;  // original driver labels per macro-input

  bool operator==(const ReducedSystemRecord&) const = default;
};

ReducedSystemRecord to_record(const ReducedSystem& rs, const Remap& remap);
std::string reduced_system_json(const ReducedSystemRecord& record);
void write_reduced_system(const ReducedSystemRecord& record, const std::filesystem::path& path);
void write_reduced_system(const ReducedSystem& rs, const Remap& remap,
                          const std::filesystem::path& path);
ReducedSystemRecord read_reduced_system(const std::filesystem::path& path);

/// Control CSV: header t,u1..uK, one row per grid point; the row at t = T
/// repeats the last sample. Trajectory CSV: header t,x1..xN.
void write_control_csv(const ControlSignal& u, const std::filesystem::path& path);
ControlSignal read_control_csv(const std::filesystem::path& path, std::vector<double> lo,
                               std::vector<double> hi);
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace ctrleq
