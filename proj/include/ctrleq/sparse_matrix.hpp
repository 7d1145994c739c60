#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctrleq/rational.hpp"

namespace ctrleq {

using NodeId = std::uint32_t;

/// One stored entry. Convention: weight(i, j) is the weight of edge j -> i,
/// so row = edge target and col = edge source.
struct Triplet {
  NodeId row = 0;
  NodeId col = 0;
  double weight = 0.0;
};

/// Immutable sparse matrix with both row-major and column-major adjacency
/// views. Duplicate coordinates are summed at build time. Optionally carries
/// exact rational weights alongside the doubles when the input allows it.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> triplets);

  /// Exact build: `exact[i]` must equal `triplets[i].weight` as a double.
  static SparseMatrix from_triplets_exact(std::size_t n_rows, std::size_t n_cols,
                                          std::vector<Triplet> triplets,
                                          std::vector<Rational> exact);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return entries_.size(); }
  bool square() const { return n_rows_ == n_cols_; }
  bool has_exact() const { return !exact_.empty(); }

  /// All entries, sorted by (row, col).
  std::span<const Triplet> entries() const { return entries_; }

  /// Entries of row i (in-edges of node i), sorted by column.
  std::span<const Triplet> row(NodeId i) const {
    return {entries_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
  }

  /// Indices into entries() for column j (out-edges of node j), sorted by row.
  std::span<const std::uint32_t> column(NodeId j) const {
    return {col_index_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
  }

  const Rational& exact_weight(std::size_t entry_index) const { return exact_[entry_index]; }

  double max_abs_weight() const { return max_abs_weight_; }

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<Triplet> entries_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> col_index_;
  std::vector<Rational> exact_;
  double max_abs_weight_ = 0.0;
};

}  // namespace ctrleq
