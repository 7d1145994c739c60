#pragma once

// The running-example system used across the test suites: three nodes,
// nodes 2 and 3 driven with bounds [1,2] and [3,4] (0-based internally).

#include <vector>

#include "ctrleq/input_structure.hpp"
#include "ctrleq/partition.hpp"
#include "ctrleq/rational.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq::testing {

inline SparseMatrix fig1_matrix(bool exact = true) {
  std::vector<Triplet> triplets = {
      {0, 1, 0.5}, {0, 2, 0.5}, {1, 0, 0.25}, {2, 0, 0.5}};
  if (!exact) return SparseMatrix::from_triplets(3, 3, std::move(triplets));
  std::vector<Rational> weights = {Rational(1, 2), Rational(1, 2), Rational(1, 4),
                                   Rational(1, 2)};
  return SparseMatrix::from_triplets_exact(3, 3, std::move(triplets), std::move(weights));
}

inline InputStructure fig1_input() {
  return InputStructure::create(3, {1, 2}, {1.0, 3.0}, {2.0, 4.0});
}

inline Partition fig1_partition_23_1() { return Partition::from_blocks(3, {{1, 2}, {0}}); }
inline Partition fig1_partition_12_3() { return Partition::from_blocks(3, {{0, 1}, {2}}); }

}  // namespace ctrleq::testing
