#pragma once

// Seeded instance generators shared by the property tests and the acceptance
// suite. All randomness flows through mt19937_64 with explicit seeds and a
// hand-rolled uniform, so runs are reproducible across platforms.

#include <cstdint>
#include <random>
#include <vector>

#include "ctrleq/input_structure.hpp"
#include "ctrleq/partition.hpp"
#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }  // bias irrelevant for tests

 private:
  std::mt19937_64 engine_;
};

/// Random digraph with small signed integer weights; duplicates possible on
/// purpose (they exercise the summing path), and negative weights let
/// signatures cancel to exactly zero.
inline SparseMatrix random_integer_digraph(Rng& rng, std::size_t n, std::size_t edges,
                                           int max_weight = 3, bool allow_self_loops = true) {
  std::vector<Triplet> triplets;
  triplets.reserve(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    auto src = static_cast<NodeId>(rng.below(n));
    auto dst = static_cast<NodeId>(rng.below(n));
    if (!allow_self_loops && src == dst) continue;
    double w = static_cast<double>(1 + rng.below(static_cast<std::uint64_t>(max_weight)));
    if (rng.uniform01() < 0.3) w = -w;
    triplets.push_back({dst, src, w});
  }
  return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

inline Partition random_partition(Rng& rng, std::size_t n, std::size_t max_blocks) {
  std::size_t blocks = 1 + rng.below(std::min(max_blocks, n));
  std::vector<std::vector<NodeId>> members(blocks);
  for (NodeId v = 0; v < n; ++v) members[rng.below(blocks)].push_back(v);
  std::erase_if(members, [](const auto& m) { return m.empty(); });
  return Partition::from_blocks(n, std::move(members));
}

/// A network with a planted control equivalence: a random quotient graph is
/// expanded block-wise, spreading each quotient weight across targets so
/// that column block sums stay constant within every planted block. Whole
/// blocks are drivers or non-drivers, so the planted partition refines the
/// drivers split and refinement recovers a partition at least as coarse.
struct PlantedNetwork {
  SparseMatrix matrix;
  InputStructure input;
  Partition planted;
};

inline PlantedNetwork make_planted_network(Rng& rng, std::size_t max_nodes,
                                           std::size_t max_edges) {
  const std::size_t quotient = 2 + rng.below(6);
  std::vector<std::vector<NodeId>> blocks(quotient);
  std::size_t n = 0;
  const std::size_t max_block =
      std::min<std::size_t>(25, std::max<std::size_t>(1, max_nodes / quotient));
  for (auto& block : blocks) {
    std::size_t size = 1 + rng.below(max_block);
    for (std::size_t i = 0; i < size; ++i) block.push_back(static_cast<NodeId>(n++));
  }

  // Quotient edges, weights scaled so no column sum exceeds ~0.5 and long
  // horizons stay tame. A quotient edge is emitted for all of its sources
  // or not at all; a partial block would break the planted equivalence.
  std::vector<Triplet> triplets;
  constexpr std::size_t kMaxTargets = 3;
  for (std::size_t g = 0; g < quotient; ++g) {
    std::size_t out_degree = 1 + rng.below(3);
    for (std::size_t d = 0; d < out_degree; ++d) {
      std::size_t h = rng.below(quotient);
      if (triplets.size() + blocks[g].size() * kMaxTargets > max_edges) continue;
      double sign = rng.uniform01() < 0.3 ? -1.0 : 1.0;
      double w = sign * rng.uniform(0.05, 0.5 / static_cast<double>(out_degree));
      for (NodeId src : blocks[g]) {
        // split w across a random subset of targets in block h
        std::size_t targets = 1 + rng.below(std::min(blocks[h].size(), kMaxTargets));
        double part = w / static_cast<double>(targets);
        std::vector<NodeId> pool = blocks[h];
        for (std::size_t t = 0; t < targets; ++t) {
          std::size_t pick = rng.below(pool.size());
          triplets.push_back({pool[pick], src, part});
          pool[pick] = pool.back();
          pool.pop_back();
        }
      }
    }
  }

  // Drive a nonempty subset of blocks; every node in a driver block gets
  // its own channel.
  std::vector<NodeId> drivers;
  std::vector<char> is_driver_block(quotient, 0);
  std::size_t driver_blocks = 1 + rng.below(quotient);
  for (std::size_t i = 0; i < driver_blocks; ++i) is_driver_block[rng.below(quotient)] = 1;
  for (std::size_t g = 0; g < quotient; ++g) {
    if (!is_driver_block[g]) continue;
    for (NodeId v : blocks[g]) drivers.push_back(v);
  }
  if (drivers.empty()) drivers.push_back(0);

  std::vector<double> lo(drivers.size()), hi(drivers.size());
  for (std::size_t l = 0; l < drivers.size(); ++l) {
    lo[l] = rng.uniform(-1.0, 0.0);
    hi[l] = lo[l] + rng.uniform(0.25, 1.25);
  }

  PlantedNetwork net;
  net.matrix = SparseMatrix::from_triplets(n, n, std::move(triplets));
  net.input = InputStructure::create(n, std::move(drivers), std::move(lo), std::move(hi));
  net.planted = Partition::from_blocks(n, std::move(blocks));
  return net;
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace ctrleq::testing
