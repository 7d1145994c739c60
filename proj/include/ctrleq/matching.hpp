#pragma once

#include <vector>

#include "ctrleq/input_structure.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

/// Maximum matching on the bipartite split of a digraph: the left copy holds
/// out-endpoints, the right copy in-endpoints, with one bipartite edge per
/// directed edge. pairs are (source node, target node).
struct Matching {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::size_t size() const { return pairs.size(); }
};

/// Hopcroft-Karp. Deterministic: adjacency is scanned in canonical
/// (source, target) order.
Matching maximum_matching(const SparseMatrix& a);

/// Minimum driver set for structural controllability: the in-endpoints left
/// unmatched by a maximum matching. A perfect matching yields the single
/// lowest-index node, so the driver count is max(N - |matching|, 1).
/// Bounds default to [lo, hi] on every channel.
InputStructure minimum_driver_set(const SparseMatrix& a, double lo = 0.0, double hi = 1.0);

}  // namespace ctrleq
