#pragma once

#include <optional>
#include <span>

#include "ctrleq/input_structure.hpp"
#include "ctrleq/partition.hpp"
#include "ctrleq/reduced_system.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

struct RefineOptions {
  double tol = -1.0;  // negative: scale-aware default; grouping gap threshold
  bool exact = false; // group signatures by exact rational equality
};

struct RefineStats {
  std::size_t splitters_processed = 0;
  std::size_t blocks_split = 0;
  double wall_ms = 0.0;
};

/// Computes the coarsest control equivalence refining `initial` by splitter
/// worklist refinement with the smaller-half discipline. Signatures of a
/// splitter S are the column block sums sum_{i in S} A(i, j); nodes of a
/// block with differing signatures are separated. Always terminates: the
/// singleton partition is a control equivalence of any matrix.
///
/// `drivers`, when given, only fixes the canonical block order of the
/// result (driver blocks first); it never affects the computed blocks.
Partition coarsest_control_equivalence(const SparseMatrix& a, const Partition& initial,
                                       const RefineOptions& opts = {},
                                       std::span<const NodeId> drivers = {},
                                       RefineStats* stats = nullptr);

struct ReduceResult {
  Partition partition;
  ReducedSystem system;
  RefineStats stats;
};

/// Full reduction: initial partition (drivers split from the rest when none
/// is supplied), refinement, then the reduced system.
ReduceResult reduce_pipeline(const SparseMatrix& a, const InputStructure& input,
                             const std::optional<Partition>& initial = std::nullopt,
                             const RefineOptions& opts = {},
                             const BuildOptions& build_opts = {});

/// The two-block partition {drivers, non-drivers}; one block when every node
/// (or no node) is a driver.
Partition drivers_split_partition(std::size_t n_nodes, std::span<const NodeId> drivers);

}  // namespace ctrleq
