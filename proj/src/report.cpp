#include "ctrleq/report.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "ctrleq/error.hpp"
#include "ctrleq/matching.hpp"
#include "ctrleq/refine.hpp"

namespace ctrleq {

namespace {

NetworkFormat parse_format(const std::string& token, const std::filesystem::path& manifest,
                           std::size_t line_no) {
  if (token == "mm" || token == "matrix-market") return NetworkFormat::MatrixMarket;
  if (token == "tsv" || token == "edge-list") return NetworkFormat::TsvEdgeList;
  if (token == "auto" || token.empty()) return NetworkFormat::Auto;
  throw IoError(manifest.string() + ":" + std::to_string(line_no) + ": unknown format '" +
                token + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::size_t env_thread_cap() {
  if (const char* env = std::getenv("CTRLEQ_THREADS")) {
    char* end = nullptr;
    unsigned long value = std::strtoul(env, &end, 10);
    if (end && *end == '\0' && value > 0) return value;
  }
  return 0;
}

std::string percent(std::size_t num, std::size_t den) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", den ? 100.0 * static_cast<double>(num) / den : 0.0);
  return buf;
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line[0] == '%') continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 2 || fields.size() > 5) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected name,path,format[,drivers_path][,bounds]");
    }
    ManifestEntry entry;
    entry.name = fields[0];
    entry.path = fields[1];
    if (entry.path.is_relative()) entry.path = path.parent_path() / entry.path;
    if (fields.size() >= 3) entry.format = parse_format(fields[2], path, line_no);
    if (fields.size() >= 4 && !fields[3].empty()) {
      std::filesystem::path drivers = fields[3];
      if (drivers.is_relative()) drivers = path.parent_path() / drivers;
      entry.drivers_path = drivers;
    }
    if (fields.size() >= 5 && !fields[4].empty()) {
      std::size_t colon = fields[4].find(':');
      if (colon == std::string::npos) {
        throw IoError(path.string() + ":" + std::to_string(line_no) +
                      ": bounds must be 'lo:hi'");
      }
      entry.bounds = {std::strtod(fields[4].c_str(), nullptr),
                      std::strtod(fields[4].c_str() + colon + 1, nullptr)};
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

ReportRow report_row(const ManifestEntry& entry) {
  ReportRow row;
  row.name = entry.name;
  try {
    auto t0 = std::chrono::steady_clock::now();
    ParseOptions popts;
    popts.format = entry.format;
    ParsedNetwork net = parse_network(entry.path, popts);
    row.parse_ms = ms_since(t0);
    row.nodes = net.matrix.n_rows();

    const double lo = entry.bounds ? entry.bounds->first : 0.0;
    const double hi = entry.bounds ? entry.bounds->second : 1.0;
    t0 = std::chrono::steady_clock::now();
    InputStructure input =
        entry.drivers_path
            ? InputStructure::uniform_bounds(net.matrix.n_rows(),
                                             parse_node_list(*entry.drivers_path, net.remap), lo,
                                             hi)
            : minimum_driver_set(net.matrix, lo, hi);
    row.drivers_ms = ms_since(t0);
    row.drivers = input.channel_count();

    t0 = std::chrono::steady_clock::now();
    ReduceResult result = reduce_pipeline(net.matrix, input);
    row.refine_ms = result.stats.wall_ms;
    row.lump_ms = ms_since(t0) - result.stats.wall_ms;
    row.reduced_nodes = result.system.n();
    row.reduced_drivers = result.system.k();
  } catch (const Error& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

std::vector<ReportRow> run_report(std::span<const ManifestEntry> entries, std::size_t threads) {
  if (threads == 0) threads = env_thread_cap();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, entries.size());

  std::vector<ReportRow> rows(entries.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < entries.size(); ++i) rows[i] = report_row(entries[i]);
    return rows;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      rows[i] = report_row(entries[i]);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

void write_report(std::span<const ReportRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_report_csv(rows);
  if (!out) throw IoError("write failed for " + path.string());
}

std::string format_report_csv(std::span<const ReportRow> rows) {
  std::string out = "name,N,n,n_over_N,K,k,k_over_K,K_over_N\n";
  for (const ReportRow& row : rows) {
    out += row.name;
    if (row.failed) {
      out += ",,,,,,,\n";
      continue;
    }
    out += ',' + std::to_string(row.nodes);
    out += ',' + std::to_string(row.reduced_nodes);
    out += ',' + percent(row.reduced_nodes, row.nodes);
    out += ',' + std::to_string(row.drivers);
    out += ',' + std::to_string(row.reduced_drivers);
    out += ',' + percent(row.reduced_drivers, row.drivers);
    out += ',' + percent(row.drivers, row.nodes);
    out += '\n';
  }
  return out;
}

}  // namespace ctrleq
