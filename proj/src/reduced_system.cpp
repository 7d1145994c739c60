#include "ctrleq/reduced_system.hpp"

#include <algorithm>
#include <cassert>
#include <string>

#include "ctrleq/aggregation.hpp"
#include "ctrleq/error.hpp"

namespace ctrleq {

std::vector<double> ReducedSystem::dense_a_hat() const {
  if (!a_hat_dense.empty()) return a_hat_dense;
  std::vector<double> dense(n() * n(), 0.0);
  for (const Triplet& e : a_hat.entries()) dense[e.row * n() + e.col] = e.weight;
  return dense;
}

ReducedSystem build_reduced_system(const SparseMatrix& a, const InputStructure& input,
                                   const Partition& partition, const BuildOptions& opts) {
  if (!a.square()) throw ValidationError("reduced system requires a square matrix");
  if (partition.node_count() != a.n_rows()) {
    throw ValidationError("partition does not cover the network");
  }

  ReducedSystem rs;
  EquivalenceCheck check = is_control_equivalence(a, partition, opts.tol);
  if (!check.equivalent) {
    std::string detail = "partition is not a control equivalence";
    if (check.witness) {
      detail += ": nodes " + std::to_string(check.witness->node_a) + " and " +
                std::to_string(check.witness->node_b) + " of block " +
                std::to_string(check.witness->block) + " differ on block " +
                std::to_string(check.witness->splitter) +
                " (deviation " + std::to_string(check.max_deviation) + ")";
    }
    if (opts.require_equivalence) throw ValidationError(detail);
    rs.warnings.push_back(detail + "; proceeding as requested");
  }

  rs.blocks = canonical_order(partition, input.driver_nodes);
  rs.driver_block_count = count_driver_blocks(rs.blocks, input.driver_nodes);
  const std::size_t n = rs.blocks.block_count();

  std::vector<char> is_driver(a.n_rows(), 0);
  for (NodeId d : input.driver_nodes) is_driver[d] = 1;
  for (std::size_t b = 0; b < rs.driver_block_count; ++b) {
    auto members = rs.blocks.block(b);
    bool any_plain = std::any_of(members.begin(), members.end(),
                                 [&](NodeId v) { return !is_driver[v]; });
    if (any_plain) {
      rs.warnings.push_back("block " + std::to_string(b) +
                            " mixes driver and non-driver nodes");
    }
  }

  // Â = LAL̄: column block sums into each target block, averaged over the
  // source block.
  const bool exact = a.has_exact();
  std::vector<Triplet> triplets;
  std::vector<Rational> exact_values;
  std::vector<double> acc(n, 0.0);
  std::vector<Rational> acc_exact(exact ? n : 0);
  std::vector<std::uint32_t> touched;
  std::vector<char> touched_flag(n, 0);
  for (std::uint32_t h = 0; h < n; ++h) {
    touched.clear();
    for (NodeId i : rs.blocks.block(h)) {
      for (const Triplet& e : a.row(i)) {
        std::uint32_t g = rs.blocks.block_of(e.col);
        if (!touched_flag[g]) {
          touched_flag[g] = 1;
          touched.push_back(g);
          acc[g] = 0.0;
          if (exact) acc_exact[g] = Rational();
        }
        acc[g] += e.weight;
        if (exact) acc_exact[g] += a.exact_weight(&e - a.entries().data());
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t g : touched) {
      const auto size = static_cast<std::int64_t>(rs.blocks.block(g).size());
      if (exact) {
        Rational value = acc_exact[g] / Rational(size);
        exact_values.push_back(value);
        triplets.push_back({h, g, value.to_double()});
      } else {
        triplets.push_back({h, g, acc[g] / static_cast<double>(size)});
      }
      touched_flag[g] = 0;
    }
  }
  rs.a_hat = exact ? SparseMatrix::from_triplets_exact(n, n, std::move(triplets),
                                                       std::move(exact_values))
                   : SparseMatrix::from_triplets(n, n, std::move(triplets));
  if (n <= kDenseAHatLimit) {
    rs.a_hat_dense.assign(n * n, 0.0);
    for (const Triplet& e : rs.a_hat.entries()) rs.a_hat_dense[e.row * n + e.col] = e.weight;
  }

  // Group the original control channels by the driver block they steer.
  rs.control_groups.assign(rs.driver_block_count, {});
  rs.lo_hat.assign(rs.driver_block_count, 0.0);
  rs.hi_hat.assign(rs.driver_block_count, 0.0);
  for (std::size_t l = 0; l < input.channel_count(); ++l) {
    std::uint32_t b = rs.blocks.block_of(input.driver_nodes[l]);
    assert(b < rs.driver_block_count);
    rs.control_groups[b].push_back(l);
    rs.lo_hat[b] += input.lo[l];
    rs.hi_hat[b] += input.hi[l];
  }
  rs.lo_orig = input.lo;
  rs.hi_orig = input.hi;
  rs.driver_nodes = input.driver_nodes;
  return rs;
}

std::vector<double> project_state(std::span<const double> x, const Partition& partition) {
  if (x.size() != partition.node_count()) {
    throw ValidationError("state dimension does not match partition");
  }
  std::vector<double> out(partition.block_count(), 0.0);
  for (NodeId v = 0; v < x.size(); ++v) out[partition.block_of(v)] += x[v];
  return out;
}

}  // namespace ctrleq
