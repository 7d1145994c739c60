#include "ctrleq/matching.hpp"

#include <cstdint>
#include <limits>
#include <vector>

#include "ctrleq/error.hpp"

namespace ctrleq {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

struct HopcroftKarp {
  const SparseMatrix& a;
  std::vector<std::uint32_t> match_left;   // left j -> matched right, or kNone
  std::vector<std::uint32_t> match_right;  // right i -> matched left, or kNone
  std::vector<std::uint32_t> dist;
  std::vector<std::uint32_t> queue;
  std::uint32_t dist_nil = kInf;

  explicit HopcroftKarp(const SparseMatrix& m)
      : a(m),
        match_left(m.n_cols(), kNone),
        match_right(m.n_rows(), kNone),
        dist(m.n_cols(), kInf) {
    queue.reserve(m.n_cols());
  }

  bool bfs() {
    queue.clear();
    for (std::uint32_t u = 0; u < match_left.size(); ++u) {
      if (match_left[u] == kNone) {
        dist[u] = 0;
        queue.push_back(u);
      } else {
        dist[u] = kInf;
      }
    }
    dist_nil = kInf;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      std::uint32_t u = queue[head];
      if (dist[u] >= dist_nil) continue;
      for (std::uint32_t idx : a.column(u)) {
        std::uint32_t v = a.entries()[idx].row;
        std::uint32_t w = match_right[v];
        if (w == kNone) {
          if (dist_nil == kInf) dist_nil = dist[u] + 1;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
      }
    }
    return dist_nil != kInf;
  }

  // Depth is bounded by the BFS layer count, not by N.
  bool dfs(std::uint32_t u) {
    for (std::uint32_t idx : a.column(u)) {
      std::uint32_t v = a.entries()[idx].row;
      std::uint32_t w = match_right[v];
      if ((w == kNone && dist[u] + 1 == dist_nil) ||
          (w != kNone && dist[w] == dist[u] + 1 && dfs(w))) {
        match_left[u] = v;
        match_right[v] = u;
        return true;
      }
    }
    dist[u] = kInf;
    return false;
  }

  void run() {
    while (bfs()) {
      for (std::uint32_t u = 0; u < match_left.size(); ++u) {
        if (match_left[u] == kNone) dfs(u);
      }
    }
  }
};

}  // namespace

Matching maximum_matching(const SparseMatrix& a) {
  if (!a.square()) throw ValidationError("matching requires a square adjacency matrix");
  HopcroftKarp hk(a);
  hk.run();
  Matching m;
  for (std::uint32_t u = 0; u < hk.match_left.size(); ++u) {
    if (hk.match_left[u] != kNone) m.pairs.emplace_back(u, hk.match_left[u]);
  }
  return m;
}

InputStructure minimum_driver_set(const SparseMatrix& a, double lo, double hi) {
  if (a.n_rows() == 0) throw ValidationError("driver set of an empty network");
  Matching m = maximum_matching(a);
  std::vector<char> matched(a.n_rows(), 0);
  for (const auto& [left, right] : m.pairs) matched[right] = 1;
  std::vector<NodeId> drivers;
  for (NodeId v = 0; v < a.n_rows(); ++v) {
    if (!matched[v]) drivers.push_back(v);
  }
  if (drivers.empty()) drivers.push_back(0);  // perfect matching still needs one input
  return InputStructure::uniform_bounds(a.n_rows(), std::move(drivers), lo, hi);
}

}  // namespace ctrleq
