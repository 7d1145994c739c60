#include "ctrleq/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctrleq/error.hpp"

namespace ctrleq {

namespace {

void check_triplets(std::size_t n_rows, std::size_t n_cols, std::span<const Triplet> triplets) {
  for (const Triplet& t : triplets) {
    if (t.row >= n_rows || t.col >= n_cols) {
      throw ValidationError("matrix entry (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ") outside " + std::to_string(n_rows) + "x" +
                            std::to_string(n_cols));
    }
    if (!std::isfinite(t.weight)) {
      throw ValidationError("non-finite weight at entry (" + std::to_string(t.row) + ", " +
                            std::to_string(t.col) + ")");
    }
  }
}

}  // namespace

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols,
                                         std::vector<Triplet> triplets) {
  return from_triplets_exact(n_rows, n_cols, std::move(triplets), {});
}

SparseMatrix SparseMatrix::from_triplets_exact(std::size_t n_rows, std::size_t n_cols,
                                               std::vector<Triplet> triplets,
                                               std::vector<Rational> exact) {
  check_triplets(n_rows, n_cols, triplets);
  const bool with_exact = !exact.empty();
  if (with_exact && exact.size() != triplets.size()) {
    throw ValidationError("exact weights must match triplet count");
  }

  std::vector<std::uint32_t> order(triplets.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const Triplet& ta = triplets[a];
    const Triplet& tb = triplets[b];
    return ta.row != tb.row ? ta.row < tb.row : ta.col < tb.col;
  });

  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.entries_.reserve(triplets.size());
  if (with_exact) m.exact_.reserve(triplets.size());
  for (std::uint32_t idx : order) {
    const Triplet& t = triplets[idx];
    if (!m.entries_.empty() && m.entries_.back().row == t.row && m.entries_.back().col == t.col) {
      m.entries_.back().weight += t.weight;  // duplicates are summed
      if (with_exact) m.exact_.back() += exact[idx];
    } else {
      m.entries_.push_back(t);
      if (with_exact) m.exact_.push_back(exact[idx]);
    }
  }
  if (with_exact) {
    // Re-sync doubles with the exact sums so both views agree bit for bit.
    for (std::size_t i = 0; i < m.entries_.size(); ++i) {
      m.entries_[i].weight = m.exact_[i].to_double();
    }
  }

  m.row_ptr_.assign(n_rows + 1, 0);
  m.col_ptr_.assign(n_cols + 1, 0);
  for (const Triplet& t : m.entries_) {
    ++m.row_ptr_[t.row + 1];
    ++m.col_ptr_[t.col + 1];
    m.max_abs_weight_ = std::max(m.max_abs_weight_, std::abs(t.weight));
  }
  std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
  std::partial_sum(m.col_ptr_.begin(), m.col_ptr_.end(), m.col_ptr_.begin());

  m.col_index_.resize(m.entries_.size());
  std::vector<std::size_t> cursor(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  for (std::uint32_t i = 0; i < m.entries_.size(); ++i) {
    m.col_index_[cursor[m.entries_[i].col]++] = i;  // entries are row-sorted, so columns stay row-sorted
  }
  return m;
}

}  // namespace ctrleq
