// ctrleq: reduce directed networks with linear dynamics to control-equivalent
// quotients, compute minimum driver sets, and verify optimality preservation
// numerically.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "ctrleq/aggregation.hpp"
#include "ctrleq/control.hpp"
#include "ctrleq/error.hpp"
#include "ctrleq/io.hpp"
#include "ctrleq/matching.hpp"
#include "ctrleq/refine.hpp"
#include "ctrleq/report.hpp"
#include "ctrleq/sim.hpp"

namespace {

using namespace ctrleq;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct NetworkArgs {
  std::string path;
  std::string format = "auto";
  bool symmetrize = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("network", path, "network file (Matrix Market or TSV edge list)")
        ->required();
    cmd->add_option("--format", format, "input format: auto, mm, tsv")
        ->check(CLI::IsMember({"auto", "mm", "tsv"}));
    cmd->add_flag("--symmetrize", symmetrize, "also add the reversed edge for every record");
  }

  ParsedNetwork parse() const {
    ParseOptions opts;
    opts.symmetrize = symmetrize;
    if (format == "mm") opts.format = NetworkFormat::MatrixMarket;
    if (format == "tsv") opts.format = NetworkFormat::TsvEdgeList;
    return parse_network(path, opts);
  }
};

struct DriverArgs {
  std::string drivers_path;
  std::string bounds = "0,1";

  void attach(CLI::App* cmd) {
    cmd->add_option("--drivers", drivers_path,
                    "file with the driver node labels; computed by maximum matching when absent");
    cmd->add_option("--bounds", bounds, "uniform control bounds as lo,hi (default 0,1)");
  }

  std::pair<double, double> parse_bounds() const {
    std::size_t comma = bounds.find(',');
    if (comma == std::string::npos) throw ValidationError("--bounds expects lo,hi");
    return {std::stod(bounds.substr(0, comma)), std::stod(bounds.substr(comma + 1))};
  }

  InputStructure resolve(const ParsedNetwork& net) const {
    auto [lo, hi] = parse_bounds();
    if (!drivers_path.empty()) {
      return InputStructure::uniform_bounds(net.matrix.n_rows(),
                                            parse_node_list(drivers_path, net.remap), lo, hi);
    }
    return minimum_driver_set(net.matrix, lo, hi);
  }
};

std::vector<double> parse_values(const std::string& text) {
  std::string data = text;
  if (!data.empty() && data[0] == '@') {
    std::ifstream in(data.substr(1));
    if (!in) throw IoError("cannot open " + data.substr(1));
    data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < data.size()) {
    while (pos < data.size() &&
           (data[pos] == ',' || std::isspace(static_cast<unsigned char>(data[pos])))) {
      ++pos;
    }
    if (pos >= data.size()) break;
    std::size_t consumed = 0;
    values.push_back(std::stod(data.substr(pos), &consumed));
    pos += consumed;
  }
  return values;
}

void print_warnings(const ReducedSystem& rs) {
  for (const std::string& w : rs.warnings) std::cerr << "warning: " << w << "\n";
}

/// Block-constant cost description in node coordinates, read from JSON:
///   {"final": [..N..],
///    "tracking": {"weight": scalar | [..N..], "reference": [..N..]},
///    "control_weight": scalar}
struct NodeCost {
  std::vector<double> final_coeff;
  std::optional<std::vector<double>> tracking_weight;
  std::optional<std::vector<double>> tracking_reference;
  std::optional<double> control_weight;
};

NodeCost parse_cost_json(const std::string& path, std::size_t n_nodes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  NodeCost cost;
  cost.final_coeff = j.at("final").get<std::vector<double>>();
  if (cost.final_coeff.size() != n_nodes) {
    throw ValidationError("cost 'final' needs " + std::to_string(n_nodes) + " values");
  }
  if (j.contains("tracking")) {
    const auto& t = j.at("tracking");
    if (t.at("weight").is_number()) {
      cost.tracking_weight = std::vector<double>(n_nodes, t.at("weight").get<double>());
    } else {
      cost.tracking_weight = t.at("weight").get<std::vector<double>>();
    }
    cost.tracking_reference = t.at("reference").get<std::vector<double>>();
    if (cost.tracking_weight->size() != n_nodes || cost.tracking_reference->size() != n_nodes) {
      throw ValidationError("cost 'tracking' arrays need " + std::to_string(n_nodes) +
                            " values");
    }
  }
  if (j.contains("control_weight")) cost.control_weight = j.at("control_weight").get<double>();
  return cost;
}

std::vector<double> block_constant_or_throw(const std::vector<double>& values,
                                            const Partition& blocks, const char* what) {
  std::vector<double> per_block(blocks.block_count());
  for (std::size_t b = 0; b < blocks.block_count(); ++b) {
    auto members = blocks.block(b);
    per_block[b] = values[members.front()];
    for (NodeId v : members) {
      if (values[v] != per_block[b]) {
        throw ValidationError(std::string(what) + " is not constant on block " +
                              std::to_string(b) +
                              "; use --initial to keep those nodes in singleton blocks");
      }
    }
  }
  return per_block;
}

CostSpec collapse_cost(const NodeCost& cost, const ReducedSystem& rs, double dt,
                       double horizon) {
  CostSpec spec;
  spec.final_coeff = block_constant_or_throw(cost.final_coeff, rs.blocks, "final cost");
  if (cost.tracking_weight) {
    CostSpec::Tracking tracking;
    tracking.weight = block_constant_or_throw(*cost.tracking_weight, rs.blocks,
                                              "tracking weight");
    std::vector<double> target = project_state(*cost.tracking_reference, rs.blocks);
    auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    tracking.reference.dim = rs.n();
    tracking.reference.dt = dt;
    tracking.reference.states.resize((steps + 1) * rs.n());
    for (std::size_t s = 0; s <= steps; ++s) {
      std::copy(target.begin(), target.end(),
                tracking.reference.states.begin() + s * rs.n());
    }
    spec.tracking = std::move(tracking);
  }
  if (cost.control_weight) {
    spec.control_weight = std::vector<double>(rs.k(), *cost.control_weight);
  }
  return spec;
}

int cmd_drivers(const NetworkArgs& net_args, const DriverArgs& driver_args) {
  ParsedNetwork net = net_args.parse();
  InputStructure input = driver_args.resolve(net);
  std::cout << "K = " << input.channel_count() << "\n";
  for (std::size_t l = 0; l < input.channel_count(); ++l) {
    std::cout << net.remap.labels[input.driver_nodes[l]]
              << (l + 1 < input.channel_count() ? ' ' : '\n');
  }
  return kExitOk;
}

struct ReduceArgs {
  std::string initial_path;
  bool drivers_split = false;
  double tol = -1.0;
  bool exact = false;
  std::string out_partition;
  std::string out_system;
};

int cmd_reduce(const NetworkArgs& net_args, const DriverArgs& driver_args,
               const ReduceArgs& args) {
  ParsedNetwork net = net_args.parse();
  InputStructure input = driver_args.resolve(net);

  std::optional<Partition> initial;
  if (!args.initial_path.empty()) {
    initial = parse_partition(args.initial_path, net.remap, input.driver_nodes);
  }

  RefineOptions opts;
  opts.tol = args.tol;
  opts.exact = args.exact;
  ReduceResult result = reduce_pipeline(net.matrix, input, initial, opts);
  print_warnings(result.system);

  std::cout << "N = " << net.matrix.n_rows() << ", n = " << result.system.n()
            << ", K = " << input.channel_count() << ", k = " << result.system.k() << "\n";
  std::cerr << "refinement: " << result.stats.splitters_processed << " splitters, "
            << result.stats.blocks_split << " splits, " << result.stats.wall_ms << " ms\n";

  if (!args.out_partition.empty()) {
    write_partition(result.partition, net.remap, args.out_partition);
  }
  if (!args.out_system.empty()) {
    write_reduced_system(result.system, net.remap, args.out_system);
  }
  return kExitOk;
}

struct VerifyArgs {
  std::uint64_t seed = 1;
  std::size_t controls = 5;
  double horizon = 10.0;
  double dt = 1e-3;
  double tol = 1e-6;
  bool skip_optimal = false;
};

int cmd_verify(const NetworkArgs& net_args, const DriverArgs& driver_args,
               const VerifyArgs& args) {
  ParsedNetwork net = net_args.parse();
  InputStructure input = driver_args.resolve(net);
  ReduceResult result = reduce_pipeline(net.matrix, input);
  print_warnings(result.system);
  const ReducedSystem& rs = result.system;
  std::cout << "reduction: N = " << net.matrix.n_rows() << " -> n = " << rs.n()
            << ", K = " << input.channel_count() << " -> k = " << rs.k() << "\n";

  std::mt19937_64 rng(args.seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };

  bool ok = true;
  const std::size_t n_nodes = net.matrix.n_rows();
  const auto hold = std::max<std::size_t>(1, static_cast<std::size_t>(0.5 / args.dt));

  // Lumped trajectories must agree under matched controls.
  double worst = 0.0;
  for (std::size_t c = 0; c < args.controls; ++c) {
    ControlSignal u =
        sample_piecewise_constant(input.lo, input.hi, args.dt, args.horizon, hold, rng());
    std::vector<double> x0(n_nodes);
    for (double& v : x0) v = uniform(-1.0, 1.0);
    worst = std::max(worst, verify_trajectory_equivalence(net.matrix, input, result.partition,
                                                          rs, u, x0, args.horizon, args.dt));
  }
  std::printf("[%s] trajectory equivalence: max deviation %.3e (tol %.1e)\n",
              worst <= args.tol ? "PASS" : "FAIL", worst, args.tol);
  ok = ok && worst <= args.tol;

  // Cost invariance for a sampled block-constant cost.
  {
    std::vector<double> c_hat(rs.n());
    for (double& v : c_hat) v = uniform(-1.0, 1.0);
    ControlSignal u =
        sample_piecewise_constant(input.lo, input.hi, args.dt, args.horizon, hold, rng());
    std::vector<double> x0(n_nodes);
    for (double& v : x0) v = uniform(-1.0, 1.0);

    CostSpec spec;
    spec.final_coeff = c_hat;
    Trajectory traj =
        integrate(SystemView::original(net.matrix, input), u, x0, args.horizon, args.dt);
    double j = evaluate_cost(traj, u, spec, result.partition, rs.control_groups);
    ControlSignal u_hat = project_control(u, rs);
    Trajectory traj_hat = integrate(SystemView::reduced(rs), u_hat,
                                    project_state(x0, rs.blocks), args.horizon, args.dt);
    double j_hat = evaluate_cost_reduced(traj_hat, u_hat, spec);
    double diff = std::abs(j - j_hat);
    double scale = 1.0 + std::max(std::abs(j), std::abs(j_hat));
    std::printf("[%s] cost invariance: |J - J_hat| = %.3e\n",
                diff <= args.tol * scale ? "PASS" : "FAIL", diff);
    ok = ok && diff <= args.tol * scale;
  }

  if (!args.skip_optimal) {
    std::vector<double> c_hat(rs.n());
    for (double& v : c_hat) v = uniform(-1.0, 1.0);
    std::vector<double> c = lift_final_coeff(c_hat, result.partition);
    std::vector<double> x0(n_nodes);
    for (double& v : x0) v = uniform(-1.0, 1.0);
    std::vector<double> x0_hat = project_state(x0, rs.blocks);
    for (Direction dir : {Direction::Sup, Direction::Inf}) {
      auto original = optimal_bangbang_value(SystemView::original(net.matrix, input), c, x0,
                                             args.horizon, args.dt, dir);
      auto reduced = optimal_bangbang_value(SystemView::reduced(rs), c_hat, x0_hat,
                                            args.horizon, args.dt, dir);
      double diff = std::abs(original.value - reduced.value);
      double scale = 1.0 + std::max(std::abs(original.value), std::abs(reduced.value));
      const char* name = dir == Direction::Sup ? "sup" : "inf";
      std::printf("[%s] optimal value (%s): V = %.9g, V_hat = %.9g, diff %.3e\n",
                  diff <= args.tol * scale ? "PASS" : "FAIL", name, original.value,
                  reduced.value, diff);
      ok = ok && diff <= args.tol * scale;
    }
  }

  if (!ok) {
    std::cerr << "verification failed\n";
    return kExitNumeric;
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string x0;
  std::string control_path;
  std::string constant;
  std::string cost_path;
  double horizon = 10.0;
  double dt = 1e-3;
  std::string out;
};

int cmd_simulate(const NetworkArgs& net_args, const DriverArgs& driver_args,
                 const SimulateArgs& args) {
  ParsedNetwork net = net_args.parse();
  InputStructure input = driver_args.resolve(net);

  std::vector<double> x0 = parse_values(args.x0);
  if (x0.size() != net.matrix.n_rows()) {
    throw ValidationError("--x0 needs " + std::to_string(net.matrix.n_rows()) + " values");
  }

  ControlSignal u;
  if (!args.control_path.empty()) {
    u = read_control_csv(args.control_path, input.lo, input.hi);
  } else if (!args.constant.empty()) {
    std::vector<double> value = parse_values(args.constant);
    u = ControlSignal::constant(value, args.dt, args.horizon, input.lo, input.hi);
  } else {
    u = ControlSignal::constant(input.lo, args.dt, args.horizon, input.lo, input.hi);
  }

  Trajectory traj =
      integrate(SystemView::original(net.matrix, input), u, x0, args.horizon, args.dt);
  std::cout << "x(T) =";
  for (double v : traj.final_state()) std::cout << ' ' << format_double(v);
  std::cout << "\n";

  if (!args.cost_path.empty()) {
    NodeCost cost = parse_cost_json(args.cost_path, net.matrix.n_rows());
    ReduceResult result = reduce_pipeline(net.matrix, input);
    print_warnings(result.system);
    CostSpec spec = collapse_cost(cost, result.system, args.dt, args.horizon);
    double j = evaluate_cost(traj, u, spec, result.partition, result.system.control_groups);
    std::cout << "J = " << format_double(j) << "\n";
  }
  if (!args.out.empty()) write_trajectory_csv(traj, args.out);
  return kExitOk;
}

struct OptimalArgs {
  std::string final_coeff;
  std::string cost_path;
  std::string x0;
  std::string direction = "sup";
  double horizon = 10.0;
  double dt = 1e-3;
  std::string out;
  std::string out_lifted;
};

int cmd_optimal(const NetworkArgs& net_args, const DriverArgs& driver_args,
                const OptimalArgs& args) {
  ParsedNetwork net = net_args.parse();
  InputStructure input = driver_args.resolve(net);
  ReduceResult result = reduce_pipeline(net.matrix, input);
  print_warnings(result.system);
  const ReducedSystem& rs = result.system;

  std::vector<double> c;
  if (!args.final_coeff.empty()) {
    c = parse_values(args.final_coeff);
  } else if (!args.cost_path.empty()) {
    NodeCost cost = parse_cost_json(args.cost_path, net.matrix.n_rows());
    if (cost.tracking_weight || cost.control_weight) {
      throw ValidationError("optimal values support the zero-running-cost family only; "
                            "drop 'tracking' and 'control_weight' from the cost file");
    }
    c = cost.final_coeff;
  } else {
    throw ValidationError("pass the final cost via --final or --cost");
  }
  if (c.size() != net.matrix.n_rows()) {
    throw ValidationError("final cost needs " + std::to_string(net.matrix.n_rows()) +
                          " values");
  }
  // The cost must be constant on the computed blocks to transfer.
  std::vector<double> c_hat = block_constant_or_throw(c, rs.blocks, "final cost");

  std::vector<double> x0(net.matrix.n_rows(), 0.0);
  if (!args.x0.empty()) {
    x0 = parse_values(args.x0);
    if (x0.size() != net.matrix.n_rows()) {
      throw ValidationError("--x0 needs " + std::to_string(net.matrix.n_rows()) + " values");
    }
  }
  Direction dir = args.direction == "sup" ? Direction::Sup : Direction::Inf;

  auto original = optimal_bangbang_value(SystemView::original(net.matrix, input), c, x0,
                                         args.horizon, args.dt, dir);
  auto reduced = optimal_bangbang_value(SystemView::reduced(rs), c_hat,
                                        project_state(x0, rs.blocks), args.horizon, args.dt, dir);
  std::cout << "V_" << args.direction << " = " << format_double(original.value) << "\n";
  std::cout << "V_hat_" << args.direction << " = " << format_double(reduced.value) << "\n";
  std::cout << "difference = " << format_double(std::abs(original.value - reduced.value)) << "\n";
  if (!args.out.empty()) write_control_csv(original.control, args.out);

  if (!args.out_lifted.empty()) {
    // The reduced optimizer lifts to an original control achieving the same
    // value; report that value as a cross-check.
    ControlSignal lifted = lift_control(reduced.control, rs);
    Trajectory traj =
        integrate(SystemView::original(net.matrix, input), lifted, x0, args.horizon, args.dt);
    double value = 0.0;
    auto xT = traj.final_state();
    for (std::size_t i = 0; i < xT.size(); ++i) value += c[i] * xT[i];
    std::cout << "lifted control value = " << format_double(value) << "\n";
    write_control_csv(lifted, args.out_lifted);
  }
  return kExitOk;
}

struct ReportArgs {
  std::string manifest;
  std::string out;
  std::size_t threads = 0;
  bool verbose = false;
};

int cmd_report(const ReportArgs& args) {
  std::vector<ManifestEntry> entries = parse_manifest(args.manifest);
  std::vector<ReportRow> rows = run_report(entries, args.threads);
  for (const ReportRow& row : rows) {
    if (row.failed) {
      std::cerr << "failed: " << row.name << ": " << row.error << "\n";
    } else if (args.verbose) {
      std::fprintf(stderr, "%s: parse %.1f ms, drivers %.1f ms, refine %.1f ms, lump %.1f ms\n",
                   row.name.c_str(), row.parse_ms, row.drivers_ms, row.refine_ms, row.lump_ms);
    }
  }
  std::string csv = format_report_csv(rows);
  if (args.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(args.out, std::ios::binary);
    if (!out) throw IoError("cannot write " + args.out);
    out << csv;
  }
  bool any_failed =
      std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed; });
  return any_failed ? kExitIo : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"control-equivalent coarse-graining of directed networks"};
  app.require_subcommand(1);

  NetworkArgs net_drivers, net_reduce, net_verify, net_simulate, net_optimal;
  DriverArgs drv_drivers, drv_reduce, drv_verify, drv_simulate, drv_optimal;
  ReduceArgs reduce_args;
  VerifyArgs verify_args;
  SimulateArgs simulate_args;
  OptimalArgs optimal_args;
  ReportArgs report_args;

  CLI::App* drivers = app.add_subcommand("drivers", "minimum driver set via maximum matching");
  net_drivers.attach(drivers);
  drv_drivers.attach(drivers);

  CLI::App* reduce =
      app.add_subcommand("reduce", "coarsest control equivalence and reduced system");
  net_reduce.attach(reduce);
  drv_reduce.attach(reduce);
  reduce->add_option("--initial", reduce_args.initial_path,
                     "initial partition file (default: drivers split from the rest)");
  reduce->add_flag("--drivers-split", reduce_args.drivers_split,
                   "start from {drivers, non-drivers} (the default)");
  reduce->add_option("--tol", reduce_args.tol,
                     "signature grouping tolerance (default scale-aware)");
  reduce->add_flag("--exact", reduce_args.exact, "exact rational signature arithmetic");
  reduce->add_option("--out-partition", reduce_args.out_partition, "write the partition here");
  reduce->add_option("--out-system", reduce_args.out_system,
                     "write the reduced system JSON here");

  CLI::App* verify = app.add_subcommand(
      "verify", "numerically check trajectory, cost and optimal-value preservation");
  net_verify.attach(verify);
  drv_verify.attach(verify);
  verify->add_option("--seed", verify_args.seed, "seed for sampled controls and costs");
  verify->add_option("--controls", verify_args.controls, "number of sampled controls");
  verify->add_option("--T", verify_args.horizon, "time horizon");
  verify->add_option("--dt", verify_args.dt, "integration step");
  verify->add_option("--tol", verify_args.tol, "acceptance tolerance");
  verify->add_flag("--skip-optimal", verify_args.skip_optimal, "skip the bang-bang value check");

  CLI::App* simulate = app.add_subcommand("simulate", "integrate the network under a control");
  net_simulate.attach(simulate);
  drv_simulate.attach(simulate);
  simulate->add_option("--x0", simulate_args.x0, "initial state, comma-separated or @file")
      ->required();
  simulate->add_option("--control", simulate_args.control_path, "control CSV (t,u1..uK)");
  simulate->add_option("--constant", simulate_args.constant, "constant control values");
  simulate->add_option("--cost", simulate_args.cost_path,
                       "block-constant cost JSON; evaluates J along the trajectory");
  simulate->add_option("--T", simulate_args.horizon, "time horizon");
  simulate->add_option("--dt", simulate_args.dt, "integration step");
  simulate->add_option("--out", simulate_args.out, "trajectory CSV output path");

  CLI::App* optimal = app.add_subcommand(
      "optimal", "bang-bang optimal values on the network and its reduction");
  net_optimal.attach(optimal);
  drv_optimal.attach(optimal);
  optimal->add_option("--final", optimal_args.final_coeff,
                      "final cost coefficients per node (block-constant)");
  optimal->add_option("--cost", optimal_args.cost_path,
                      "cost JSON holding the final coefficients");
  optimal->add_option("--x0", optimal_args.x0, "initial state (default zero)");
  optimal->add_option("--direction", optimal_args.direction, "sup or inf")
      ->check(CLI::IsMember({"sup", "inf"}));
  optimal->add_option("--T", optimal_args.horizon, "time horizon");
  optimal->add_option("--dt", optimal_args.dt, "integration step");
  optimal->add_option("--out", optimal_args.out, "write the optimal control CSV here");
  optimal->add_option("--out-lifted", optimal_args.out_lifted,
                      "also lift the reduced optimizer and write it here");

  CLI::App* report =
      app.add_subcommand("report", "Table-style reduction report over a manifest");
  report->add_option("manifest", report_args.manifest,
                     "CSV manifest: name,path,format[,drivers_path][,bounds]")
      ->required();
  report->add_option("--out", report_args.out, "report CSV path (default stdout)");
  report->add_option("--threads", report_args.threads, "worker pool size (0 = auto)");
  report->add_flag("--verbose", report_args.verbose, "print per-stage wall times");

  CLI11_PARSE(app, argc, argv);

  try {
    if (drivers->parsed()) return cmd_drivers(net_drivers, drv_drivers);
    if (reduce->parsed()) return cmd_reduce(net_reduce, drv_reduce, reduce_args);
    if (verify->parsed()) return cmd_verify(net_verify, drv_verify, verify_args);
    if (simulate->parsed()) return cmd_simulate(net_simulate, drv_simulate, simulate_args);
    if (optimal->parsed()) return cmd_optimal(net_optimal, drv_optimal, optimal_args);
    if (report->parsed()) return cmd_report(report_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
