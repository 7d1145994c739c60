#include "ctrleq/partition.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ctrleq/error.hpp"

namespace ctrleq {

Partition Partition::from_blocks(std::size_t n_nodes, std::vector<std::vector<NodeId>> blocks) {
  Partition p;
  p.block_of_.assign(n_nodes, UINT32_MAX);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) {
      throw ValidationError("partition block " + std::to_string(b) + " is empty");
    }
    std::sort(blocks[b].begin(), blocks[b].end());
    for (NodeId v : blocks[b]) {
      if (v >= n_nodes) {
        throw ValidationError("partition references node " + std::to_string(v) +
                              " outside 0.." + std::to_string(n_nodes - 1));
      }
      if (p.block_of_[v] != UINT32_MAX) {
        throw ValidationError("node " + std::to_string(v) + " appears in blocks " +
                              std::to_string(p.block_of_[v]) + " and " + std::to_string(b));
      }
      p.block_of_[v] = static_cast<std::uint32_t>(b);
    }
  }
  for (NodeId v = 0; v < n_nodes; ++v) {
    if (p.block_of_[v] == UINT32_MAX) {
      throw ValidationError("node " + std::to_string(v) + " missing from every block");
    }
  }
  p.blocks_ = std::move(blocks);
  return p;
}

Partition Partition::singletons(std::size_t n_nodes) {
  std::vector<std::vector<NodeId>> blocks(n_nodes);
  for (NodeId v = 0; v < n_nodes; ++v) blocks[v] = {v};
  return from_blocks(n_nodes, std::move(blocks));
}

Partition Partition::single_block(std::size_t n_nodes) {
  std::vector<NodeId> all(n_nodes);
  std::iota(all.begin(), all.end(), 0u);
  return from_blocks(n_nodes, {std::move(all)});
}

bool Partition::refines(const Partition& coarser) const {
  if (node_count() != coarser.node_count()) return false;
  for (const auto& block : blocks_) {
    std::uint32_t target = coarser.block_of(block.front());
    for (NodeId v : block) {
      if (coarser.block_of(v) != target) return false;
    }
  }
  return true;
}

bool Partition::same_blocks(const Partition& other) const {
  if (node_count() != other.node_count() || block_count() != other.block_count()) return false;
  for (const auto& block : blocks_) {
    std::uint32_t b = other.block_of(block.front());
    if (other.block(b).size() != block.size()) return false;
    for (NodeId v : block) {
      if (other.block_of(v) != b) return false;
    }
  }
  return true;
}

Partition canonical_order(const Partition& p, std::span<const NodeId> drivers) {
  std::vector<char> is_driver(p.node_count(), 0);
  for (NodeId d : drivers) is_driver[d] = 1;

  std::vector<std::size_t> order(p.block_count());
  std::iota(order.begin(), order.end(), 0u);
  auto has_driver = [&](std::size_t b) {
    for (NodeId v : p.block(b)) {
      if (is_driver[v]) return true;
    }
    return false;
  };
  std::vector<char> driver_block(p.block_count());
  for (std::size_t b = 0; b < p.block_count(); ++b) driver_block[b] = has_driver(b);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (driver_block[a] != driver_block[b]) return driver_block[a] > driver_block[b];
    return p.block(a).front() < p.block(b).front();
  });

  std::vector<std::vector<NodeId>> blocks;
  blocks.reserve(p.block_count());
  for (std::size_t b : order) {
    auto members = p.block(b);
    blocks.emplace_back(members.begin(), members.end());
  }
  return Partition::from_blocks(p.node_count(), std::move(blocks));
}

std::size_t count_driver_blocks(const Partition& p, std::span<const NodeId> drivers) {
  std::vector<char> is_driver(p.node_count(), 0);
  for (NodeId d : drivers) is_driver[d] = 1;
  std::size_t count = 0;
  for (std::size_t b = 0; b < p.block_count(); ++b) {
    for (NodeId v : p.block(b)) {
      if (is_driver[v]) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace ctrleq
