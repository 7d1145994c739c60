#pragma once

#include <span>
#include <vector>

#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

/// Driver nodes and per-channel control bounds. Channel l drives node
/// driver_nodes[l] within [lo[l], hi[l]]; all other nodes are uncontrolled.
struct InputStructure {
  std::vector<NodeId> driver_nodes;
  std::vector<double> lo;
  std::vector<double> hi;

  /// Validates distinctness, range and lo <= hi; throws ValidationError.
  static InputStructure create(std::size_t n_nodes, std::vector<NodeId> drivers,
                               std::vector<double> lo, std::vector<double> hi);

  static InputStructure uniform_bounds(std::size_t n_nodes, std::vector<NodeId> drivers,
                                       double lo = 0.0, double hi = 1.0);

  std::size_t channel_count() const { return driver_nodes.size(); }
};

}  // namespace ctrleq
