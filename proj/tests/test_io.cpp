#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "ctrleq/error.hpp"
#include "ctrleq/io.hpp"
#include "ctrleq/refine.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace ctrleq;
using namespace ctrleq::testing;

namespace {

const std::string fig1_tsv =
    "# running example\n"
    "1\t2\t0.25\n"
    "1\t3\t0.5\n"
    "2\t1\t0.5\n"
    "3\t1\t0.5\n";

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("ctrleq-test-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path file(const std::string& name) const { return path / name; }
};

void put(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("TSV edge records land as A(dst, src)") {
  ParsedNetwork net = parse_network_text(fig1_tsv, "fig1.tsv");
  CHECK(net.matrix.n_rows() == 3);
  CHECK(net.matrix.nnz() == 4);
  CHECK(net.remap.labels == std::vector<std::string>{"1", "2", "3"});
  CHECK(net.matrix.has_exact());

  auto expect = [&](NodeId row, NodeId col, double w) {
    for (const Triplet& e : net.matrix.row(row)) {
      if (e.col == col) {
        CHECK(e.weight == w);
        return;
      }
    }
    FAIL("missing entry (", row, ", ", col, ")");
  };
  expect(1, 0, 0.25);  // 1 -> 2
  expect(2, 0, 0.5);   // 1 -> 3
  expect(0, 1, 0.5);   // 2 -> 1
  expect(0, 2, 0.5);   // 3 -> 1
}

TEST_CASE("missing weight column defaults to one and duplicates sum") {
  ParsedNetwork net = parse_network_text("a\tb\nb\ta\na\tb\n", "pair.tsv");
  CHECK(net.matrix.n_rows() == 2);
  CHECK(net.matrix.nnz() == 2);
  CHECK(net.matrix.row(1)[0].weight == 2.0);  // a->b twice
  CHECK(net.matrix.row(0)[0].weight == 1.0);
}

TEST_CASE("TSV parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_network_text("1\t2\n1\n", "bad.tsv"),
                       doctest::Contains("bad.tsv:2"), IoError);
  CHECK_THROWS_WITH_AS(parse_network_text("1\t2\tabc\n", "bad.tsv"),
                       doctest::Contains("non-numeric weight"), IoError);
  CHECK_THROWS_WITH_AS(parse_network_text("% only comments\n", "bad.tsv"),
                       doctest::Contains("empty graph"), IoError);
}

TEST_CASE("Matrix Market entries are matrix coordinates") {
  const std::string mm =
      "%%MatrixMarket matrix coordinate real general\n"
      "% comment\n"
      "3 3 2\n"
      "1 2 0.5\n"
      "3 1 -1.5\n";
  ParsedNetwork net = parse_network_text(mm, "m.mtx");
  CHECK(net.matrix.n_rows() == 3);
  CHECK(net.matrix.nnz() == 2);
  CHECK(net.remap.labels == std::vector<std::string>{"1", "2", "3"});
  CHECK(net.matrix.row(0)[0].col == 1);
  CHECK(net.matrix.row(0)[0].weight == 0.5);
  CHECK(net.matrix.row(2)[0].weight == -1.5);

  // declared nnz is enforced; the independent check is a raw line count
  std::size_t data_lines = 0;
  for (std::size_t pos = 0; pos < mm.size();) {
    std::size_t end = mm.find('\n', pos);
    std::string_view line(mm.data() + pos, end - pos);
    if (!line.empty() && line[0] != '%') ++data_lines;
    pos = end + 1;
  }
  CHECK(data_lines - 1 == 2);  // size line + declared entries

  CHECK_THROWS_WITH_AS(
      parse_network_text("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n",
                         "m.mtx"),
      doctest::Contains("declares 3 entries"), IoError);
  CHECK_THROWS_WITH_AS(
      parse_network_text("%%MatrixMarket matrix coordinate real general\n0 0 0\n", "m.mtx"),
      doctest::Contains("empty graph"), IoError);
  CHECK_THROWS_WITH_AS(
      parse_network_text("%%MatrixMarket matrix coordinate real general\n2 3 0\n", "m.mtx"),
      doctest::Contains("square"), IoError);
}

TEST_CASE("symmetric banners require explicit expansion") {
  const std::string sym =
      "%%MatrixMarket matrix coordinate real symmetric\n"
      "2 2 1\n"
      "2 1 0.5\n";
  CHECK_THROWS_WITH_AS(parse_network_text(sym, "s.mtx"), doctest::Contains("--symmetrize"),
                       IoError);
  ParseOptions opts;
  opts.symmetrize = true;
  ParsedNetwork net = parse_network_text(sym, "s.mtx", opts);
  CHECK(net.matrix.nnz() == 2);

  // TSV symmetrization adds the reversed record
  ParsedNetwork tsv = parse_network_text("1\t2\t0.25\n", "t.tsv", opts);
  CHECK(tsv.matrix.nnz() == 2);
  CHECK(tsv.matrix.row(0)[0].weight == 0.25);
  CHECK(tsv.matrix.row(1)[0].weight == 0.25);
}

TEST_CASE("partition files: blocks, directive, singletons") {
  ParsedNetwork net = parse_network_text(fig1_tsv, "fig1.tsv");
  Partition p = parse_partition_text("2 3\n1\n", "p.txt", net.remap);
  CHECK(p.same_blocks(fig1_partition_23_1()));

  std::vector<NodeId> drivers = {1, 2};
  Partition split = parse_partition_text("@drivers-split\n", "p.txt", net.remap, drivers);
  CHECK(split.same_blocks(fig1_partition_23_1()));

  Partition singles = parse_partition_text("1\n2\n3\n", "p.txt", net.remap);
  CHECK(singles.same_blocks(Partition::singletons(3)));

  CHECK_THROWS_WITH_AS(parse_partition_text("1 2 4\n3\n", "p.txt", net.remap),
                       doctest::Contains("unknown node id"), ValidationError);
  CHECK_THROWS_AS(parse_partition_text("1 2\n2 3\n", "p.txt", net.remap), ValidationError);
  CHECK_THROWS_AS(parse_partition_text("1 2\n", "p.txt", net.remap), ValidationError);
  CHECK_THROWS_AS(parse_partition_text("@drivers-split\n", "p.txt", net.remap),
                  ValidationError);
}

TEST_CASE("partitions survive a write/parse round trip") {
  TempDir dir;
  ParsedNetwork net = parse_network_text(fig1_tsv, "fig1.tsv");
  Partition p = fig1_partition_23_1();
  write_partition(p, net.remap, dir.file("p.txt"));
  Partition back = parse_partition(dir.file("p.txt"), net.remap);
  CHECK(back.blocks() == p.blocks());
}

TEST_CASE("reduced system JSON matches the running example") {
  ParsedNetwork net = parse_network_text(fig1_tsv, "fig1.tsv");
  ReduceResult result = reduce_pipeline(net.matrix, fig1_input());
  ReducedSystemRecord record = to_record(result.system, net.remap);

  CHECK(record.n == 2);
  CHECK(record.k == 1);
  CHECK(record.a_hat == std::vector<double>{0.0, 0.75, 0.5, 0.0});
  CHECK(record.driver_blocks == std::vector<std::size_t>{0});
  CHECK(record.m_hat == std::vector<double>{4.0});
  CHECK(record.big_m_hat == std::vector<double>{6.0});
  CHECK(record.blocks ==
        std::vector<std::vector<std::string>>{{"2", "3"}, {"1"}});
  CHECK(record.control_groups == std::vector<std::vector<std::string>>{{"2", "3"}});

  std::string json = reduced_system_json(record);
  CHECK(json.find("\"A_hat\"") != std::string::npos);
  CHECK(json.find("0.75") != std::string::npos);

  TempDir dir;
  write_reduced_system(record, dir.file("rs.json"));
  CHECK(read_reduced_system(dir.file("rs.json")) == record);
}

TEST_CASE("reduced system records round-trip bit-exactly") {
  TempDir dir;
  Rng rng(64);
  for (int i = 0; i < 100; ++i) {
    ReducedSystemRecord record;
    record.n = 1 + rng.below(6);
    record.k = 1 + rng.below(record.n);
    record.a_hat.resize(record.n * record.n);
    for (double& v : record.a_hat) {
      // a mix of dyadic and awkward decimals
      v = rng.uniform01() < 0.5 ? rng.uniform(-2.0, 2.0)
                                : 0.1 * static_cast<double>(rng.below(100));
    }
    for (std::size_t l = 0; l < record.k; ++l) {
      record.driver_blocks.push_back(l);
      double lo = rng.uniform(-3.0, 0.0);
      record.m_hat.push_back(lo);
      record.big_m_hat.push_back(lo + rng.uniform01());
      record.control_groups.push_back({"d" + std::to_string(l)});
    }
    for (std::size_t b = 0; b < record.n; ++b) {
      record.blocks.push_back({"v" + std::to_string(b)});
    }
    write_reduced_system(record, dir.file("round.json"));
    CHECK(read_reduced_system(dir.file("round.json")) == record);
  }
}

TEST_CASE("weights beyond the exact range fall back to floating point") {
  ParsedNetwork net =
      parse_network_text("1\t2\t0.12345678901234567890123456789\n", "long.tsv");
  CHECK(!net.matrix.has_exact());
  CHECK(net.matrix.row(1)[0].weight == doctest::Approx(0.123456789012345679).epsilon(1e-15));

  // short decimals keep the exact side channel
  CHECK(parse_network_text("1\t2\t0.5\n", "short.tsv").matrix.has_exact());
}

TEST_CASE("remapping is a bijection over the interned labels") {
  ParsedNetwork net = parse_network_text("x\ty\ny\tz\nz\tx\n", "n.tsv");
  CHECK(net.remap.size() == 3);
  for (NodeId v = 0; v < net.remap.size(); ++v) {
    CHECK(net.remap.require(net.remap.labels[v]) == v);
  }
  CHECK_THROWS_AS(net.remap.require("missing"), ValidationError);
}

TEST_CASE("control CSV round trip") {
  TempDir dir;
  ControlSignal u = ControlSignal::from_samples(2, 0.25, {0.1, 0.9, 0.4, 0.6, 0.2, 0.8},
                                                {0.0, 0.0}, {1.0, 1.0});
  write_control_csv(u, dir.file("u.csv"));
  ControlSignal back = read_control_csv(dir.file("u.csv"), {0.0, 0.0}, {1.0, 1.0});
  REQUIRE(back.steps() == u.steps());
  CHECK(back.dt() == u.dt());
  for (std::size_t s = 0; s < u.steps(); ++s) {
    for (std::size_t c = 0; c < 2; ++c) CHECK(back.value(s, c) == u.value(s, c));
  }
}

TEST_CASE("trajectory CSV has one row per grid point") {
  TempDir dir;
  Trajectory traj;
  traj.dim = 2;
  traj.dt = 0.5;
  traj.states = {0.0, 1.0, 0.25, 0.75, 0.5, 0.5};
  write_trajectory_csv(traj, dir.file("x.csv"));
  std::ifstream in(dir.file("x.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x1,x2");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("unwritable paths raise io errors") {
  ReducedSystemRecord record;
  record.n = 0;
  record.k = 0;
  CHECK_THROWS_AS(write_reduced_system(record, "/nonexistent-dir/rs.json"), IoError);
}

TEST_CASE("format_double emits shortest round-tripping decimals") {
  CHECK(format_double(0.75) == "0.75");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(format_double(-2.0) == "-2");
}
