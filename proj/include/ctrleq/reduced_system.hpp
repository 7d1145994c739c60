#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ctrleq/input_structure.hpp"
#include "ctrleq/partition.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

/// Reduced system over a control-equivalence partition: x̂' = Â x̂ + B̂ û.
/// Â = LAL̄; column l of B̂ is the l-th unit vector, so B̂ is represented
/// implicitly by the driver block count k. Blocks are ordered canonically
/// with driver blocks first.
struct ReducedSystem {
  SparseMatrix a_hat;
  std::vector<double> a_hat_dense;  // row-major cache, empty above kDenseAHatLimit
  Partition blocks;
  std::size_t driver_block_count = 0;  // k

  /// control_groups[l] lists the original channel indices steering the
  /// driver nodes of block l; the groups partition {0..K-1}.
  std::vector<std::vector<std::size_t>> control_groups;
  std::vector<double> lo_hat, hi_hat;    // macro-input bounds (group sums)
  std::vector<double> lo_orig, hi_orig;  // original per-channel bounds, kept for lifting
  std::vector<NodeId> driver_nodes;      // original driver node per channel

  std::vector<std::string> warnings;

  std::size_t n() const { return blocks.block_count(); }
  std::size_t k() const { return driver_block_count; }

  /// Dense row-major copy of Â (cached copy when available).
  std::vector<double> dense_a_hat() const;
};

inline constexpr std::size_t kDenseAHatLimit = 4096;

struct BuildOptions {
  bool require_equivalence = true;  // false: record a warning and proceed
  double tol = -1.0;                // negative: scale-aware default
};

/// Builds the reduced system for a partition, verifying the
/// control-equivalence precondition unless opts.require_equivalence is off.
ReducedSystem build_reduced_system(const SparseMatrix& a, const InputStructure& input,
                                   const Partition& partition, const BuildOptions& opts = {});

/// x̂ = Lx: per-block sums of the state vector.
std::vector<double> project_state(std::span<const double> x, const Partition& partition);

}  // namespace ctrleq
