#include "ctrleq/refine.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <limits>

#include "ctrleq/aggregation.hpp"
#include "ctrleq/error.hpp"

namespace ctrleq {

namespace {

constexpr NodeId kZeroSentinel = std::numeric_limits<NodeId>::max();

struct Engine {
  const SparseMatrix& a;
  const bool exact;
  const double tol;

  std::vector<std::vector<NodeId>> members;
  std::vector<std::uint32_t> block_of;
  std::vector<std::uint32_t> pos_in_block;
  std::deque<std::uint32_t> worklist;
  std::vector<char> in_worklist;

  std::vector<double> sig;
  std::vector<Rational> sig_exact;
  std::vector<char> touched_flag;
  std::vector<NodeId> touched;

  // scratch for the block currently being split
  std::vector<NodeId> run_nodes;
  std::vector<std::vector<NodeId>> groups;

  RefineStats stats;

  Engine(const SparseMatrix& matrix, const Partition& initial, bool exact_mode, double gap_tol)
      : a(matrix),
        exact(exact_mode),
        tol(gap_tol),
        block_of(matrix.n_rows()),
        pos_in_block(matrix.n_rows()),
        sig(matrix.n_rows(), 0.0),
        sig_exact(exact_mode ? matrix.n_rows() : 0),
        touched_flag(matrix.n_rows(), 0) {
    members.reserve(initial.block_count() * 2);
    for (std::size_t b = 0; b < initial.block_count(); ++b) {
      auto block = initial.block(b);
      members.emplace_back(block.begin(), block.end());
      for (std::uint32_t p = 0; p < block.size(); ++p) {
        block_of[block[p]] = static_cast<std::uint32_t>(b);
        pos_in_block[block[p]] = p;
      }
      worklist.push_back(static_cast<std::uint32_t>(b));
    }
    in_worklist.assign(initial.block_count(), 1);
  }

  double value_of(NodeId v) const { return v == kZeroSentinel ? 0.0 : sig[v]; }
  Rational exact_value_of(NodeId v) const { return v == kZeroSentinel ? Rational() : sig_exact[v]; }

  void accumulate(std::uint32_t splitter) {
    touched.clear();
    for (NodeId i : members[splitter]) {
      for (const Triplet& e : a.row(i)) {
        if (!touched_flag[e.col]) {
          touched_flag[e.col] = 1;
          touched.push_back(e.col);
          sig[e.col] = 0.0;
          if (exact) sig_exact[e.col] = Rational();
        }
        sig[e.col] += e.weight;
        if (exact) sig_exact[e.col] += a.exact_weight(&e - a.entries().data());
      }
    }
  }

  /// Groups run_nodes (which may include the zero sentinel) by signature.
  /// Float mode sorts and cuts at gaps above tol; exact mode groups by
  /// exact equality. Returns the index of the group holding the sentinel,
  /// or SIZE_MAX when no sentinel is present.
  std::size_t form_groups() {
    if (exact) {
      std::sort(run_nodes.begin(), run_nodes.end(), [&](NodeId x, NodeId y) {
        Rational vx = exact_value_of(x);
        Rational vy = exact_value_of(y);
        if (vx != vy) return vx < vy;
        return x < y;
      });
    } else {
      std::sort(run_nodes.begin(), run_nodes.end(), [&](NodeId x, NodeId y) {
        double vx = value_of(x);
        double vy = value_of(y);
        if (vx != vy) return vx < vy;
        return x < y;
      });
    }
    groups.clear();
    std::size_t sentinel_group = SIZE_MAX;
    for (std::size_t i = 0; i < run_nodes.size(); ++i) {
      bool new_group = i == 0;
      if (!new_group) {
        if (exact) {
          new_group = exact_value_of(run_nodes[i]) != exact_value_of(run_nodes[i - 1]);
        } else {
          new_group = value_of(run_nodes[i]) - value_of(run_nodes[i - 1]) > tol;
        }
      }
      if (new_group) groups.emplace_back();
      if (run_nodes[i] == kZeroSentinel) {
        sentinel_group = groups.size() - 1;
      } else {
        groups.back().push_back(run_nodes[i]);
      }
    }
    return sentinel_group;
  }

  void move_node(NodeId v, std::uint32_t to) {
    std::uint32_t from = block_of[v];
    std::uint32_t pos = pos_in_block[v];
    NodeId last = members[from].back();
    members[from][pos] = last;
    pos_in_block[last] = pos;
    members[from].pop_back();
    block_of[v] = to;
    pos_in_block[v] = static_cast<std::uint32_t>(members[to].size());
    members[to].push_back(v);
  }

  void enqueue(std::uint32_t b) {
    if (!in_worklist[b]) {
      in_worklist[b] = 1;
      worklist.push_back(b);
    }
  }

  /// Splits block g according to the signature groups of its touched
  /// members; untouched members implicitly carry signature zero and stay
  /// with the sentinel group.
  void split_block(std::uint32_t g, std::span<const NodeId> touched_members) {
    const std::size_t untouched = members[g].size() - touched_members.size();
    run_nodes.assign(touched_members.begin(), touched_members.end());
    if (untouched > 0) run_nodes.push_back(kZeroSentinel);
    const std::size_t sentinel_group = form_groups();

    if (groups.size() <= 1) return;

    // Which sub-block inherits g's storage: the sentinel group (with the
    // untouched remainder) when present, otherwise the first group.
    const std::size_t keeper = untouched > 0 ? sentinel_group : 0;

    struct Part {
      std::uint32_t id;
      std::size_t size;
      NodeId min_node;  // kZeroSentinel = unknown, compute on demand
    };
    std::vector<Part> parts;
    parts.reserve(groups.size());

    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (gi == keeper) continue;
      auto nb = static_cast<std::uint32_t>(members.size());
      members.emplace_back();
      members.back().reserve(groups[gi].size());
      in_worklist.push_back(0);
      NodeId min_node = groups[gi].front();
      for (NodeId v : groups[gi]) {
        move_node(v, nb);
        min_node = std::min(min_node, v);
      }
      parts.push_back({nb, groups[gi].size(), min_node});
    }
    ++stats.blocks_split;

    if (in_worklist[g]) {
      // g keeps its queue slot; its siblings must all become splitters.
      for (const Part& p : parts) enqueue(p.id);
      return;
    }

    // Smaller-half rule: every part except one largest joins the worklist.
    Part keeper_part{g, members[g].size(), kZeroSentinel};
    std::size_t max_size = keeper_part.size;
    for (const Part& p : parts) max_size = std::max(max_size, p.size);

    auto min_member = [&](const Part& p) {
      if (p.min_node != kZeroSentinel) return p.min_node;
      return *std::min_element(members[p.id].begin(), members[p.id].end());
    };

    const Part* stay_out = nullptr;
    if (keeper_part.size == max_size) stay_out = &keeper_part;
    for (const Part& p : parts) {
      if (p.size != max_size) continue;
      if (!stay_out || min_member(p) < min_member(*stay_out)) stay_out = &p;
    }
    if (stay_out != &keeper_part) enqueue(g);
    for (const Part& p : parts) {
      if (&p != stay_out) enqueue(p.id);
    }
  }

  void process(std::uint32_t splitter) {
    ++stats.splitters_processed;
    accumulate(splitter);
    if (touched.empty()) return;

    std::sort(touched.begin(), touched.end(), [&](NodeId x, NodeId y) {
      if (block_of[x] != block_of[y]) return block_of[x] < block_of[y];
      return x < y;
    });
    for (std::size_t begin = 0; begin < touched.size();) {
      std::size_t end = begin;
      const std::uint32_t g = block_of[touched[begin]];
      while (end < touched.size() && block_of[touched[end]] == g) ++end;
      if (members[g].size() > 1) {
        split_block(g, std::span<const NodeId>(touched.data() + begin, end - begin));
      }
      begin = end;
    }
    for (NodeId v : touched) touched_flag[v] = 0;
  }

  void run() {
    while (!worklist.empty()) {
      std::uint32_t s = worklist.front();
      worklist.pop_front();
      in_worklist[s] = 0;
      process(s);
    }
  }
};

}  // namespace

Partition coarsest_control_equivalence(const SparseMatrix& a, const Partition& initial,
                                       const RefineOptions& opts, std::span<const NodeId> drivers,
                                       RefineStats* stats) {
  if (!a.square()) throw ValidationError("refinement requires a square matrix");
  if (initial.node_count() != a.n_rows()) {
    throw ValidationError("initial partition does not cover the network");
  }
  if (opts.exact && !a.has_exact()) {
    throw ValidationError("exact refinement requested but weights have no exact representation");
  }
  const double tol = opts.exact ? 0.0 : (opts.tol < 0.0 ? default_equivalence_tol(a) : opts.tol);

  const auto start = std::chrono::steady_clock::now();
  Engine engine(a, initial, opts.exact, tol);
  engine.run();
  std::vector<std::vector<NodeId>> blocks;
  blocks.reserve(engine.members.size());
  for (auto& block : engine.members) {
    std::sort(block.begin(), block.end());
    blocks.push_back(std::move(block));
  }
  Partition result = canonical_order(Partition::from_blocks(a.n_rows(), std::move(blocks)), drivers);
  engine.stats.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (stats) *stats = engine.stats;
  return result;
}

Partition drivers_split_partition(std::size_t n_nodes, std::span<const NodeId> drivers) {
  std::vector<char> is_driver(n_nodes, 0);
  for (NodeId d : drivers) {
    if (d >= n_nodes) throw ValidationError("driver node out of range");
    is_driver[d] = 1;
  }
  std::vector<NodeId> driver_block;
  std::vector<NodeId> rest;
  for (NodeId v = 0; v < n_nodes; ++v) {
    (is_driver[v] ? driver_block : rest).push_back(v);
  }
  std::vector<std::vector<NodeId>> blocks;
  if (!driver_block.empty()) blocks.push_back(std::move(driver_block));
  if (!rest.empty()) blocks.push_back(std::move(rest));
  return Partition::from_blocks(n_nodes, std::move(blocks));
}

ReduceResult reduce_pipeline(const SparseMatrix& a, const InputStructure& input,
                             const std::optional<Partition>& initial, const RefineOptions& opts,
                             const BuildOptions& build_opts) {
  Partition start =
      initial ? *initial : drivers_split_partition(a.n_rows(), input.driver_nodes);
  RefineStats stats;
  Partition refined = coarsest_control_equivalence(a, start, opts, input.driver_nodes, &stats);
  BuildOptions build = build_opts;
  if (build.tol < 0.0 && opts.tol >= 0.0) build.tol = opts.tol;
  ReducedSystem system = build_reduced_system(a, input, refined, build);
  return ReduceResult{std::move(refined), std::move(system), stats};
}

}  // namespace ctrleq
