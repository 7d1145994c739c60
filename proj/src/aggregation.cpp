#include "ctrleq/aggregation.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "ctrleq/error.hpp"

namespace ctrleq {

AggregationPair::AggregationPair(Partition partition) : partition_(std::move(partition)) {}

AggregationPair build_aggregation(const Partition& partition, std::size_t n_nodes) {
  if (partition.node_count() != n_nodes) {
    throw ValidationError("partition covers " + std::to_string(partition.node_count()) +
                          " nodes, expected " + std::to_string(n_nodes));
  }
  return AggregationPair(partition);
}

void AggregationPair::apply_l(std::span<const double> x, std::span<double> out) const {
  assert(x.size() == node_count() && out.size() == n());
  std::fill(out.begin(), out.end(), 0.0);
  for (NodeId v = 0; v < x.size(); ++v) out[partition_.block_of(v)] += x[v];
}

void AggregationPair::apply_lbar(std::span<const double> x_hat, std::span<double> out) const {
  assert(x_hat.size() == n() && out.size() == node_count());
  for (NodeId v = 0; v < out.size(); ++v) {
    std::uint32_t b = partition_.block_of(v);
    out[v] = x_hat[b] / static_cast<double>(partition_.block(b).size());
  }
}

std::vector<double> AggregationPair::dense_l() const {
  std::vector<double> l(n() * node_count(), 0.0);
  for (std::size_t b = 0; b < n(); ++b) {
    for (NodeId v : partition_.block(b)) l[b * node_count() + v] = 1.0;
  }
  return l;
}

std::vector<double> AggregationPair::dense_lbar() const {
  std::vector<double> lbar(node_count() * n(), 0.0);
  for (std::size_t b = 0; b < n(); ++b) {
    double w = 1.0 / static_cast<double>(partition_.block(b).size());
    for (NodeId v : partition_.block(b)) lbar[v * n() + b] = w;
  }
  return lbar;
}

bool AggregationPair::product_is_identity() const {
  std::vector<Rational> row(n());
  for (std::size_t j = 0; j < n(); ++j) {
    std::fill(row.begin(), row.end(), Rational());
    Rational share(1, static_cast<std::int64_t>(partition_.block(j).size()));
    for (NodeId v : partition_.block(j)) row[partition_.block_of(v)] += share;
    for (std::size_t i = 0; i < n(); ++i) {
      if (row[i] != Rational(i == j ? 1 : 0)) return false;
    }
  }
  return true;
}

double default_equivalence_tol(const SparseMatrix& a) {
  return a.has_exact() ? 0.0 : 1e-9 * (1.0 + a.max_abs_weight());
}

namespace {

struct TouchedNode {
  std::uint32_t block;
  NodeId node;
};

}  // namespace

EquivalenceCheck is_control_equivalence(const SparseMatrix& a, const Partition& partition,
                                        double tol) {
  if (!a.square()) throw ValidationError("control equivalence requires a square matrix");
  if (partition.node_count() != a.n_rows()) {
    throw ValidationError("partition over " + std::to_string(partition.node_count()) +
                          " nodes does not match matrix of size " + std::to_string(a.n_rows()));
  }
  if (tol < 0.0) tol = default_equivalence_tol(a);
  const bool exact = a.has_exact() && tol == 0.0;
  const std::size_t n_nodes = a.n_rows();

  EquivalenceCheck result;
  std::vector<double> sig(n_nodes, 0.0);
  std::vector<Rational> sig_exact(exact ? n_nodes : 0);
  std::vector<char> touched_flag(n_nodes, 0);
  std::vector<TouchedNode> touched;
  touched.reserve(64);

  auto find_untouched = [&](std::span<const NodeId> members) {
    for (NodeId v : members) {
      if (!touched_flag[v]) return v;
    }
    return members.front();
  };

  for (std::uint32_t s = 0; s < partition.block_count(); ++s) {
    touched.clear();
    for (NodeId i : partition.block(s)) {
      for (const Triplet& e : a.row(i)) {
        if (!touched_flag[e.col]) {
          touched_flag[e.col] = 1;
          touched.push_back({partition.block_of(e.col), e.col});
          sig[e.col] = 0.0;
          if (exact) sig_exact[e.col] = Rational();
        }
        sig[e.col] += e.weight;
        if (exact) sig_exact[e.col] += a.exact_weight(&e - a.entries().data());
      }
    }
    std::sort(touched.begin(), touched.end(), [](const TouchedNode& x, const TouchedNode& y) {
      return x.block != y.block ? x.block < y.block : x.node < y.node;
    });

    for (std::size_t begin = 0; begin < touched.size();) {
      std::size_t end = begin;
      while (end < touched.size() && touched[end].block == touched[begin].block) ++end;
      const std::uint32_t g = touched[begin].block;
      auto members = partition.block(g);
      const std::size_t untouched = members.size() - (end - begin);

      NodeId max_node = touched[begin].node;
      NodeId min_node = touched[begin].node;
      double max_sig = sig[max_node];
      double min_sig = max_sig;
      double sum = 0.0;
      bool all_equal_exact = true;
      for (std::size_t t = begin; t < end; ++t) {
        NodeId v = touched[t].node;
        sum += sig[v];
        if (exact) {
          if (sig_exact[max_node] < sig_exact[v]) max_node = v;
          if (sig_exact[v] < sig_exact[min_node]) min_node = v;
          if (sig_exact[v] != sig_exact[touched[begin].node]) all_equal_exact = false;
          max_sig = std::max(max_sig, sig[v]);
          min_sig = std::min(min_sig, sig[v]);
        } else {
          if (sig[v] > max_sig) {
            max_sig = sig[v];
            max_node = v;
          }
          if (sig[v] < min_sig) {
            min_sig = sig[v];
            min_node = v;
          }
        }
      }

      bool zero_padded_max = false;
      bool zero_padded_min = false;
      if (untouched > 0) {
        const Rational zero;
        const bool zero_above = exact ? sig_exact[max_node] < zero : 0.0 > max_sig;
        const bool zero_below = exact ? zero < sig_exact[min_node] : 0.0 < min_sig;
        if (zero_above) {
          max_sig = 0.0;
          zero_padded_max = true;
        }
        if (zero_below) {
          min_sig = 0.0;
          zero_padded_min = true;
        }
      }

      bool uniform;
      if (exact) {
        uniform = all_equal_exact &&
                  (untouched == 0 || sig_exact[touched[begin].node].is_zero());
      } else {
        uniform = max_sig == min_sig;
      }
      if (!uniform) {
        const double avg = sum / static_cast<double>(members.size());
        const double dev = std::max(max_sig - avg, avg - min_sig);
        result.max_deviation = std::max(result.max_deviation, dev);
        const bool violates = exact ? true : dev > tol;
        if (violates && !result.witness) {
          EquivalenceWitness w;
          w.block = g;
          w.splitter = s;
          w.node_a = zero_padded_max ? find_untouched(members) : max_node;
          w.node_b = zero_padded_min ? find_untouched(members) : min_node;
          result.witness = w;
          result.equivalent = false;
        }
        if (exact) result.equivalent = false;
      }
      begin = end;
    }

    for (const TouchedNode& t : touched) touched_flag[t.node] = 0;
  }

  if (!exact && result.max_deviation > tol) result.equivalent = false;
  return result;
}

double column_block_sum(const SparseMatrix& a, std::span<const NodeId> block, NodeId j) {
  if (j >= a.n_cols()) throw ValidationError("column index out of range");
  std::vector<char> in_block(a.n_rows(), 0);
  for (NodeId v : block) in_block[v] = 1;
  if (a.has_exact()) {
    Rational sum;
    for (std::uint32_t idx : a.column(j)) {
      if (in_block[a.entries()[idx].row]) sum += a.exact_weight(idx);
    }
    return sum.to_double();
  }
  double sum = 0.0;
  for (std::uint32_t idx : a.column(j)) {
    if (in_block[a.entries()[idx].row]) sum += a.entries()[idx].weight;
  }
  return sum;
}

}  // namespace ctrleq
