#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ctrleq/partition.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

/// The aggregation matrix L of a partition together with its right inverse
/// L̄. Row i of L is the indicator vector of block i; column i of L̄ carries
/// 1/|H_i| on the same support, so L·L̄ = I_n holds exactly.
///
/// Stored implicitly through the partition; dense copies are only
/// materialized on request (tests and small systems).
class AggregationPair {
 public:
  explicit AggregationPair(Partition partition);

  const Partition& partition() const { return partition_; }
  std::size_t n() const { return partition_.block_count(); }
  std::size_t node_count() const { return partition_.node_count(); }

  /// out = L x (block sums), out.size() == n().
  void apply_l(std::span<const double> x, std::span<double> out) const;

  /// out = L̄ x̂ (uniform spread), out.size() == node_count().
  void apply_lbar(std::span<const double> x_hat, std::span<double> out) const;

  std::vector<double> dense_l() const;     // n x N, row-major
  std::vector<double> dense_lbar() const;  // N x n, row-major

  /// Verifies L·L̄ == I_n in exact rational arithmetic.
  bool product_is_identity() const;

 private:
  Partition partition_;
};

AggregationPair build_aggregation(const Partition& partition, std::size_t n_nodes);

/// Nodes with differing column block sums into a common splitter block,
/// found when a partition fails the equivalence test.
struct EquivalenceWitness {
  std::uint32_t block = 0;     // block whose members disagree
  NodeId node_a = 0;           // member with the largest sum
  NodeId node_b = 0;           // member with the smallest sum
  std::uint32_t splitter = 0;  // block S with sum_S(node_a) != sum_S(node_b)
};

struct EquivalenceCheck {
  bool equivalent = true;
  double max_deviation = 0.0;  // max-norm of LA - LAL̄L
  std::optional<EquivalenceWitness> witness;
  explicit operator bool() const { return equivalent; }
};

/// Scale-aware default tolerance: 0 when A carries exact weights, otherwise
/// 1e-9 * (1 + max |entry|).
double default_equivalence_tol(const SparseMatrix& a);

/// Tests LA = LAL̄L up to tol in max-norm. Negative tol selects the default
/// policy. Exact rational arithmetic is used when A carries exact weights
/// and tol resolves to zero.
EquivalenceCheck is_control_equivalence(const SparseMatrix& a, const Partition& partition,
                                        double tol = -1.0);

/// Total weight of edges from node j into the given block:
/// sum over i in block of A(i, j).
double column_block_sum(const SparseMatrix& a, std::span<const NodeId> block, NodeId j);

}  // namespace ctrleq
