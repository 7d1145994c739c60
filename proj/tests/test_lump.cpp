#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ctrleq/control.hpp"
#include "ctrleq/error.hpp"
#include "ctrleq/refine.hpp"
#include "ctrleq/reduced_system.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ctrleq;
using namespace ctrleq::testing;

namespace {

ReducedSystem fig1_reduced() {
  return build_reduced_system(fig1_matrix(), fig1_input(), fig1_partition_23_1());
}

}  // namespace

TEST_CASE("reduced system of the running example") {
  ReducedSystem rs = fig1_reduced();
  CHECK(rs.n() == 2);
  CHECK(rs.k() == 1);
  CHECK(rs.dense_a_hat() == std::vector<double>{0.0, 0.75, 0.5, 0.0});
  CHECK(rs.lo_hat == std::vector<double>{4.0});
  CHECK(rs.hi_hat == std::vector<double>{6.0});
  CHECK(rs.control_groups == std::vector<std::vector<std::size_t>>{{0, 1}});
  CHECK(rs.blocks.block(0)[0] == 1);  // driver block {2,3} leads
  CHECK(rs.warnings.empty());
}

TEST_CASE("singleton partition reproduces the original system") {
  // drivers occupy the lowest indices here, so the canonical driver-first
  // order is the identity and A_hat literally equals A
  SparseMatrix a = SparseMatrix::from_triplets(
      3, 3, {{0, 1, 0.5}, {1, 2, -0.25}, {2, 0, 1.0}, {2, 2, 0.125}});
  InputStructure input = InputStructure::create(3, {0, 1}, {1.0, 3.0}, {2.0, 4.0});
  ReducedSystem rs = build_reduced_system(a, input, Partition::singletons(3));
  CHECK(rs.n() == 3);
  CHECK(rs.k() == 2);
  CHECK(rs.dense_a_hat() == dense_from_sparse(a));
  CHECK(rs.control_groups == std::vector<std::vector<std::size_t>>{{0}, {1}});
  CHECK(rs.lo_hat == std::vector<double>{1.0, 3.0});
  CHECK(rs.hi_hat == std::vector<double>{2.0, 4.0});

  // when drivers sit elsewhere the blocks are reordered driver-first, and
  // A_hat is the corresponding relabeling of A
  ReducedSystem permuted = build_reduced_system(fig1_matrix(), fig1_input(),
                                                Partition::singletons(3));
  CHECK(permuted.n() == 3);
  CHECK(permuted.k() == 2);
  std::vector<NodeId> order = {1, 2, 0};  // blocks [{1},{2},{0}]
  auto a_dense = dense_from_sparse(fig1_matrix());
  auto a_hat = permuted.dense_a_hat();
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(permuted.blocks.block(i)[0] == order[i]);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(a_hat[i * 3 + j] == a_dense[order[i] * 3 + order[j]]);
    }
  }
}

TEST_CASE("non-equivalent partitions are rejected unless overridden") {
  SparseMatrix a = fig1_matrix();
  CHECK_THROWS_AS(build_reduced_system(a, fig1_input(), fig1_partition_12_3()),
                  ValidationError);

  BuildOptions opts;
  opts.require_equivalence = false;
  ReducedSystem rs = build_reduced_system(a, fig1_input(), fig1_partition_12_3(), opts);
  CHECK(rs.n() == 2);
  REQUIRE(!rs.warnings.empty());
  CHECK(rs.warnings.front().find("not a control equivalence") != std::string::npos);
}

TEST_CASE("blocks mixing driver and non-driver nodes trigger a warning") {
  SparseMatrix zero = SparseMatrix::from_triplets(3, 3, {});
  InputStructure input = InputStructure::uniform_bounds(3, {1});
  ReducedSystem rs = build_reduced_system(zero, input, Partition::from_blocks(3, {{0, 1}, {2}}));
  REQUIRE(!rs.warnings.empty());
  CHECK(rs.warnings.front().find("mixes driver and non-driver") != std::string::npos);
}

TEST_CASE("exchange identity LA = A_hat L on planted equivalences") {
  Rng rng(42);
  for (int i = 0; i < 15; ++i) {
    PlantedNetwork net = make_planted_network(rng, 20, 200);
    ReduceResult result = reduce_pipeline(net.matrix, net.input);
    const Partition& p = result.partition;
    const std::size_t n_nodes = net.matrix.n_rows();
    const std::size_t blocks = p.block_count();

    DenseMatrix la = matmul(dense_l(p), blocks, n_nodes, dense_from_sparse(net.matrix), n_nodes);
    DenseMatrix al = matmul(result.system.dense_a_hat(), blocks, blocks, dense_l(p), n_nodes);
    for (std::size_t idx = 0; idx < la.size(); ++idx) {
      CHECK(std::abs(la[idx] - al[idx]) <= 1e-12);
    }
  }
}

TEST_CASE("state projection sums blocks") {
  std::vector<double> x = {1.0, 2.0, 3.0};
  CHECK(project_state(x, fig1_partition_23_1()) == std::vector<double>{5.0, 1.0});
  CHECK(project_state(x, Partition::singletons(3)) == std::vector<double>{1.0, 2.0, 3.0});

  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    std::size_t n = 1 + rng.below(30);
    Partition p = random_partition(rng, n, 5);
    std::vector<double> v = random_vector(rng, n, -2.0, 2.0);
    std::vector<double> expected(p.block_count(), 0.0);
    DenseMatrix l = dense_l(p);
    for (std::size_t b = 0; b < p.block_count(); ++b) {
      for (std::size_t j = 0; j < n; ++j) expected[b] += l[b * n + j] * v[j];
    }
    auto got = project_state(v, p);
    for (std::size_t b = 0; b < p.block_count(); ++b) {
      CHECK(got[b] == doctest::Approx(expected[b]).epsilon(1e-13));
    }
  }
}

TEST_CASE("control projection sums channel groups") {
  ReducedSystem rs = fig1_reduced();
  ControlSignal u = ControlSignal::constant(std::vector<double>{1.5, 3.5}, 0.5, 2.0,
                                            {1.0, 3.0}, {2.0, 4.0});
  ControlSignal u_hat = project_control(u, rs);
  CHECK(u_hat.channels() == 1);
  for (std::size_t s = 0; s < u_hat.steps(); ++s) CHECK(u_hat.value(s, 0) == 5.0);

  // k == K: projection is the identity
  SparseMatrix a = fig1_matrix();
  ReducedSystem identity = build_reduced_system(a, fig1_input(), Partition::singletons(3));
  ControlSignal same = project_control(u, identity);
  CHECK(same.channels() == 2);
  for (std::size_t s = 0; s < same.steps(); ++s) {
    CHECK(same.value(s, 0) == 1.5);
    CHECK(same.value(s, 1) == 3.5);
  }
}

TEST_CASE("projected controls stay within the macro bounds") {
  Rng rng(17);
  for (int i = 0; i < 15; ++i) {
    PlantedNetwork net = make_planted_network(rng, 30, 300);
    ReduceResult result = reduce_pipeline(net.matrix, net.input);
    ControlSignal u = sample_piecewise_constant(net.input.lo, net.input.hi, 0.1, 2.0, 3, rng.below(1u << 30));
    ControlSignal u_hat = project_control(u, result.system);
    for (std::size_t s = 0; s < u_hat.steps(); ++s) {
      for (std::size_t l = 0; l < u_hat.channels(); ++l) {
        CHECK(u_hat.value(s, l) >= result.system.lo_hat[l]);
        CHECK(u_hat.value(s, l) <= result.system.hi_hat[l]);
      }
    }
  }
}

TEST_CASE("lifting follows the affine formula of the running example") {
  ReducedSystem rs = fig1_reduced();
  ControlSignal u_hat = ControlSignal::constant(std::vector<double>{5.0}, 0.5, 2.0, {4.0}, {6.0});
  ControlSignal u = lift_control(u_hat, rs);
  CHECK(u.channels() == 2);
  for (std::size_t s = 0; s < u.steps(); ++s) {
    CHECK(u.value(s, 0) == 1.5);  // 1 + (5-4)/2
    CHECK(u.value(s, 1) == 3.5);  // 3 + (5-4)/2
  }

  // round trip is exact here
  ControlSignal back = project_control(u, rs);
  for (std::size_t s = 0; s < back.steps(); ++s) CHECK(back.value(s, 0) == 5.0);

  // lower bound maps to the lower bounds
  ControlSignal at_lo = ControlSignal::constant(std::vector<double>{4.0}, 0.5, 2.0, {4.0}, {6.0});
  ControlSignal lifted_lo = lift_control(at_lo, rs);
  CHECK(lifted_lo.value(0, 0) == 1.0);
  CHECK(lifted_lo.value(0, 1) == 3.0);
}

TEST_CASE("degenerate macro intervals freeze the lifted channels") {
  SparseMatrix zero = SparseMatrix::from_triplets(2, 2, {});
  InputStructure input = InputStructure::create(2, {0, 1}, {0.5, -1.0}, {0.5, -1.0});
  ReducedSystem rs = build_reduced_system(zero, input, Partition::single_block(2));
  CHECK(rs.lo_hat == rs.hi_hat);

  ControlSignal u_hat = ControlSignal::constant(std::vector<double>{-0.5}, 0.5, 1.0,
                                                {-0.5}, {-0.5});
  ControlSignal u = lift_control(u_hat, rs);
  CHECK(u.value(0, 0) == 0.5);
  CHECK(u.value(0, 1) == -1.0);
}

TEST_CASE("lift then project is the identity and respects original bounds") {
  Rng rng(23);
  for (int i = 0; i < 15; ++i) {
    PlantedNetwork net = make_planted_network(rng, 30, 300);
    ReduceResult result = reduce_pipeline(net.matrix, net.input);
    const ReducedSystem& rs = result.system;
    ControlSignal u_hat = sample_piecewise_constant(rs.lo_hat, rs.hi_hat, 0.1, 2.0, 2,
                                                    rng.below(1u << 30));
    ControlSignal u = lift_control(u_hat, rs);
    for (std::size_t s = 0; s < u.steps(); ++s) {
      for (std::size_t l = 0; l < u.channels(); ++l) {
        CHECK(u.value(s, l) >= rs.lo_orig[l]);
        CHECK(u.value(s, l) <= rs.hi_orig[l]);
      }
    }
    ControlSignal back = project_control(u, rs);
    for (std::size_t s = 0; s < u_hat.steps(); ++s) {
      for (std::size_t l = 0; l < u_hat.channels(); ++l) {
        CHECK(back.value(s, l) == doctest::Approx(u_hat.value(s, l)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("macro bounds are the group sums of the original bounds") {
  Rng rng(29);
  for (int i = 0; i < 10; ++i) {
    PlantedNetwork net = make_planted_network(rng, 40, 400);
    ReduceResult result = reduce_pipeline(net.matrix, net.input);
    const ReducedSystem& rs = result.system;
    for (std::size_t l = 0; l < rs.k(); ++l) {
      double lo = 0.0, hi = 0.0;
      for (std::size_t channel : rs.control_groups[l]) {
        lo += net.input.lo[channel];
        hi += net.input.hi[channel];
      }
      CHECK(rs.lo_hat[l] == lo);
      CHECK(rs.hi_hat[l] == hi);
      CHECK(rs.lo_hat[l] <= rs.hi_hat[l]);
    }
  }
}

TEST_CASE("control groups partition the channel set") {
  Rng rng(31);
  for (int i = 0; i < 10; ++i) {
    PlantedNetwork net = make_planted_network(rng, 40, 400);
    ReduceResult result = reduce_pipeline(net.matrix, net.input);
    std::vector<char> seen(net.input.channel_count(), 0);
    for (const auto& group : result.system.control_groups) {
      for (std::size_t channel : group) {
        CHECK(channel < seen.size());
        CHECK(!seen[channel]);
        seen[channel] = 1;
      }
    }
    for (char s : seen) CHECK(s == 1);
  }
}

TEST_CASE("grid mismatches are rejected") {
  ReducedSystem rs = fig1_reduced();
  ControlSignal u_hat = ControlSignal::constant(std::vector<double>{5.0}, 0.5, 2.0, {4.0}, {6.0});
  CHECK_THROWS_AS(lift_control(ControlSignal::constant(std::vector<double>{7.0}, 0.5, 2.0,
                                                       {7.0}, {7.0}),
                               rs),
                  ValidationError);
  ControlSignal wrong_channels = ControlSignal::constant(std::vector<double>{1.5}, 0.5, 2.0,
                                                         {1.0}, {2.0});
  CHECK_THROWS_AS(project_control(wrong_channels, rs), ValidationError);
}

TEST_CASE("out-of-bound samples are rejected at construction") {
  CHECK_THROWS_AS(ControlSignal::constant(std::vector<double>{3.0}, 0.5, 1.0, {0.0}, {1.0}),
                  ValidationError);
  CHECK_THROWS_AS(ControlSignal::from_samples(1, 0.5, {0.5, 1.5}, {0.0}, {1.0}),
                  ValidationError);
}
