#include "ctrleq/input_structure.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "ctrleq/error.hpp"

namespace ctrleq {

InputStructure InputStructure::create(std::size_t n_nodes, std::vector<NodeId> drivers,
                                      std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != drivers.size() || hi.size() != drivers.size()) {
    throw ValidationError("bounds must have one entry per driver");
  }
  std::unordered_set<NodeId> seen;
  for (std::size_t l = 0; l < drivers.size(); ++l) {
    if (drivers[l] >= n_nodes) {
      throw ValidationError("driver node " + std::to_string(drivers[l]) + " outside 0.." +
                            std::to_string(n_nodes - 1));
    }
    if (!seen.insert(drivers[l]).second) {
      throw ValidationError("driver node " + std::to_string(drivers[l]) + " listed twice");
    }
    if (!std::isfinite(lo[l]) || !std::isfinite(hi[l]) || lo[l] > hi[l]) {
      throw ValidationError("invalid bounds [" + std::to_string(lo[l]) + ", " +
                            std::to_string(hi[l]) + "] for channel " + std::to_string(l));
    }
  }
  return InputStructure{std::move(drivers), std::move(lo), std::move(hi)};
}

InputStructure InputStructure::uniform_bounds(std::size_t n_nodes, std::vector<NodeId> drivers,
                                              double lo, double hi) {
  std::vector<double> los(drivers.size(), lo);
  std::vector<double> his(drivers.size(), hi);
  return create(n_nodes, std::move(drivers), std::move(los), std::move(his));
}

}  // namespace ctrleq
