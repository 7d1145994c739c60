#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ctrleq/sparse_matrix.hpp"

namespace ctrleq {

/// Ordered partition of the node set {0..N-1} into disjoint non-empty blocks.
/// Block members are kept sorted; the block order itself is significant and
/// is fixed by the caller (see canonical_order).
class Partition {
 public:
  Partition() = default;

  /// Validates cover, disjointness and non-emptiness; throws ValidationError.
  static Partition from_blocks(std::size_t n_nodes, std::vector<std::vector<NodeId>> blocks);
  static Partition singletons(std::size_t n_nodes);
  static Partition single_block(std::size_t n_nodes);

  std::size_t node_count() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  std::span<const NodeId> block(std::size_t b) const { return blocks_[b]; }
  std::uint32_t block_of(NodeId v) const { return block_of_[v]; }
  const std::vector<std::vector<NodeId>>& blocks() const { return blocks_; }

  /// True if every block of *this is contained in a single block of coarser.
  bool refines(const Partition& coarser) const;

  /// Block-set equality, ignoring block order.
  bool same_blocks(const Partition& other) const;

 private:
  std::vector<std::vector<NodeId>> blocks_;
  std::vector<std::uint32_t> block_of_;
};

/// Reorders blocks canonically: blocks containing at least one driver first,
/// then the rest, each group sorted by smallest member. With no drivers the
/// order is purely by smallest member.
Partition canonical_order(const Partition& p, std::span<const NodeId> drivers = {});

/// Number of blocks containing at least one driver.
std::size_t count_driver_blocks(const Partition& p, std::span<const NodeId> drivers);

}  // namespace ctrleq
