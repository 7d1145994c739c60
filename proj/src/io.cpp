#include "ctrleq/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ctrleq/error.hpp"

namespace ctrleq {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_weight(std::string_view token, std::string_view file, std::size_t line_no) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw IoError(std::string(file) + ":" + std::to_string(line_no) + ": non-numeric weight '" +
                  std::string(token) + "'");
  }
  return value;
}

std::size_t parse_index(std::string_view token, std::string_view file, std::size_t line_no) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw IoError(std::string(file) + ":" + std::to_string(line_no) + ": malformed index '" +
                  std::string(token) + "'");
  }
  return value;
}

/// Iterates lines, stripping trailing '\r'; yields (line_no, content).
struct LineReader {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line_no = 0;

  std::optional<std::string_view> next() {
    if (pos >= text.size()) return std::nullopt;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  }
};

struct EdgeAccumulator {
  std::vector<Triplet> triplets;
  std::vector<Rational> exact;
  bool exact_ok = true;

  void add(NodeId row, NodeId col, double weight, std::optional<Rational> exact_weight) {
    triplets.push_back({row, col, weight});
    if (exact_ok && exact_weight) {
      exact.push_back(*exact_weight);
    } else {
      exact_ok = false;
      exact.clear();
    }
  }

  SparseMatrix build(std::size_t n) && {
    if (exact_ok && !triplets.empty()) {
      try {
        return SparseMatrix::from_triplets_exact(n, n, std::move(triplets), std::move(exact));
      } catch (const NumericError&) {
        // exact sums overflowed; the double path below still works
      }
    }
    return SparseMatrix::from_triplets(n, n, std::move(triplets));
  }
};

ParsedNetwork parse_matrix_market(std::string_view text, std::string_view name,
                                  const ParseOptions& opts) {
  LineReader reader{text};
  auto banner_line = reader.next();
  if (!banner_line) throw IoError(std::string(name) + ": empty file");
  auto banner = split_ws(*banner_line);
  if (banner.size() < 5 || banner[0] != "%%MatrixMarket" || banner[1] != "matrix" ||
      banner[2] != "coordinate") {
    throw IoError(std::string(name) + ":1: expected Matrix Market coordinate banner");
  }
  std::string_view field = banner[3];
  std::string_view symmetry = banner[4];
  if (field != "real" && field != "integer" && field != "pattern") {
    throw IoError(std::string(name) + ":1: unsupported field type '" + std::string(field) + "'");
  }
  bool symmetric = false;
  if (symmetry == "general") {
    symmetric = false;
  } else if (symmetry == "symmetric") {
    if (!opts.symmetrize) {
      throw IoError(std::string(name) +
                    ":1: symmetric input; directed interpretation is mandatory, pass "
                    "--symmetrize to expand both directions");
    }
    symmetric = true;
  } else {
    throw IoError(std::string(name) + ":1: unsupported symmetry '" + std::string(symmetry) + "'");
  }

  std::size_t rows = 0, cols = 0, declared = 0;
  std::size_t size_line_no = 0;
  while (auto line = reader.next()) {
    if (line->empty() || (*line)[0] == '%') continue;
    auto fields = split_ws(*line);
    if (fields.size() != 3) {
      throw IoError(std::string(name) + ":" + std::to_string(reader.line_no) +
                    ": malformed size line");
    }
    rows = parse_index(fields[0], name, reader.line_no);
    cols = parse_index(fields[1], name, reader.line_no);
    declared = parse_index(fields[2], name, reader.line_no);
    size_line_no = reader.line_no;
    break;
  }
  if (size_line_no == 0) throw IoError(std::string(name) + ": missing size line");
  if (rows != cols) {
    throw IoError(std::string(name) + ": adjacency matrix must be square, got " +
                  std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (rows == 0) throw IoError(std::string(name) + ": empty graph");

  EdgeAccumulator edges;
  std::size_t seen = 0;
  while (auto line = reader.next()) {
    if (line->empty() || (*line)[0] == '%') continue;
    auto fields = split_ws(*line);
    const std::size_t expected = field == "pattern" ? 2 : 3;
    if (fields.size() != expected) {
      throw IoError(std::string(name) + ":" + std::to_string(reader.line_no) +
                    ": malformed entry line");
    }
    std::size_t i = parse_index(fields[0], name, reader.line_no);
    std::size_t j = parse_index(fields[1], name, reader.line_no);
    if (i < 1 || i > rows || j < 1 || j > cols) {
      throw IoError(std::string(name) + ":" + std::to_string(reader.line_no) +
                    ": index out of range");
    }
    double w = 1.0;
    std::optional<Rational> exact = Rational(1);
    if (field != "pattern") {
      w = parse_weight(fields[2], name, reader.line_no);
      exact = Rational::parse_decimal(fields[2]);
    }
    auto r = static_cast<NodeId>(i - 1);
    auto c = static_cast<NodeId>(j - 1);
    edges.add(r, c, w, exact);
    if (symmetric && r != c) edges.add(c, r, w, exact);
    if (!symmetric && opts.symmetrize && r != c) edges.add(c, r, w, exact);
    ++seen;
  }
  if (seen != declared) {
    throw IoError(std::string(name) + ": header declares " + std::to_string(declared) +
                  " entries, found " + std::to_string(seen));
  }

  ParsedNetwork result;
  result.matrix = std::move(edges).build(rows);
  result.remap.labels.reserve(rows);
  for (std::size_t v = 1; v <= rows; ++v) {
    result.remap.intern(std::to_string(v));
  }
  return result;
}

ParsedNetwork parse_tsv(std::string_view text, std::string_view name, const ParseOptions& opts) {
  LineReader reader{text};
  Remap remap;
  struct RawEdge {
    NodeId src, dst;
    double weight;
    std::optional<Rational> exact;
  };
  std::vector<RawEdge> raw;
  while (auto line = reader.next()) {
    if (line->empty() || (*line)[0] == '%' || (*line)[0] == '#') continue;
    auto fields = split_ws(*line);
    if (fields.size() < 2 || fields.size() > 3) {
      throw IoError(std::string(name) + ":" + std::to_string(reader.line_no) +
                    ": expected 'src dst [weight]', got " + std::to_string(fields.size()) +
                    " fields");
    }
    NodeId src = remap.intern(std::string(fields[0]));
    NodeId dst = remap.intern(std::string(fields[1]));
    double w = 1.0;
    std::optional<Rational> exact = Rational(1);
    if (fields.size() == 3) {
      w = parse_weight(fields[2], name, reader.line_no);
      exact = Rational::parse_decimal(fields[2]);
    }
    raw.push_back({src, dst, w, exact});
  }
  if (remap.size() == 0) throw IoError(std::string(name) + ": empty graph");

  EdgeAccumulator edges;
  for (const RawEdge& e : raw) {
    edges.add(e.dst, e.src, e.weight, e.exact);  // record src -> dst sets A(dst, src)
    if (opts.symmetrize && e.src != e.dst) edges.add(e.src, e.dst, e.weight, e.exact);
  }
  ParsedNetwork result;
  result.matrix = std::move(edges).build(remap.size());
  result.remap = std::move(remap);
  return result;
}

NetworkFormat detect_format(std::string_view text, const std::filesystem::path& path) {
  if (text.starts_with("%%MatrixMarket")) return NetworkFormat::MatrixMarket;
  auto ext = path.extension().string();
  if (ext == ".mtx" || ext == ".mm") return NetworkFormat::MatrixMarket;
  return NetworkFormat::TsvEdgeList;
}

}  // namespace

NodeId Remap::require(const std::string& label) const {
  auto it = index.find(label);
  if (it == index.end()) throw ValidationError("unknown node id '" + label + "'");
  return it->second;
}

NodeId Remap::intern(const std::string& label) {
  auto [it, inserted] = index.try_emplace(label, static_cast<NodeId>(labels.size()));
  if (inserted) labels.push_back(label);
  return it->second;
}

ParsedNetwork parse_network(const std::filesystem::path& path, const ParseOptions& opts) {
  std::string text = read_file(path);
  ParseOptions resolved = opts;
  if (resolved.format == NetworkFormat::Auto) resolved.format = detect_format(text, path);
  return parse_network_text(text, path.string(), resolved);
}

ParsedNetwork parse_network_text(std::string_view text, std::string_view name,
                                 const ParseOptions& opts) {
  NetworkFormat format = opts.format;
  if (format == NetworkFormat::Auto) {
    format = text.starts_with("%%MatrixMarket") ? NetworkFormat::MatrixMarket
                                                : NetworkFormat::TsvEdgeList;
  }
  return format == NetworkFormat::MatrixMarket ? parse_matrix_market(text, name, opts)
                                               : parse_tsv(text, name, opts);
}

Partition parse_partition(const std::filesystem::path& path, const Remap& remap,
                          std::span<const NodeId> drivers) {
  return parse_partition_text(read_file(path), path.string(), remap, drivers);
}

Partition parse_partition_text(std::string_view text, std::string_view name, const Remap& remap,
                               std::span<const NodeId> drivers) {
  LineReader reader{text};
  std::vector<std::vector<NodeId>> blocks;
  bool directive = false;
  while (auto line = reader.next()) {
    if (line->empty() || (*line)[0] == '#' || (*line)[0] == '%') continue;
    auto fields = split_ws(*line);
    if (fields.size() == 1 && fields[0] == "@drivers-split") {
      directive = true;
      continue;
    }
    std::vector<NodeId> block;
    block.reserve(fields.size());
    for (std::string_view f : fields) block.push_back(remap.require(std::string(f)));
    blocks.push_back(std::move(block));
  }
  if (directive) {
    if (!blocks.empty()) {
      throw ValidationError(std::string(name) + ": @drivers-split cannot be mixed with blocks");
    }
    if (drivers.empty()) {
      throw ValidationError(std::string(name) + ": @drivers-split requires a known driver set");
    }
    std::vector<char> is_driver(remap.size(), 0);
    for (NodeId d : drivers) is_driver[d] = 1;
    std::vector<NodeId> driver_block, rest;
    for (NodeId v = 0; v < remap.size(); ++v) (is_driver[v] ? driver_block : rest).push_back(v);
    std::vector<std::vector<NodeId>> split;
    if (!driver_block.empty()) split.push_back(std::move(driver_block));
    if (!rest.empty()) split.push_back(std::move(rest));
    return Partition::from_blocks(remap.size(), std::move(split));
  }
  return Partition::from_blocks(remap.size(), std::move(blocks));
}

void write_partition(const Partition& partition, const Remap& remap,
                     const std::filesystem::path& path) {
  std::string out;
  for (std::size_t b = 0; b < partition.block_count(); ++b) {
    bool first = true;
    for (NodeId v : partition.block(b)) {
      if (!first) out += ' ';
      out += remap.labels[v];
      first = false;
    }
    out += '\n';
  }
  write_file(path, out);
}

std::vector<NodeId> parse_node_list(const std::filesystem::path& path, const Remap& remap) {
  std::string text = read_file(path);
  LineReader reader{text};
  std::vector<NodeId> nodes;
  while (auto line = reader.next()) {
    if (line->empty() || (*line)[0] == '#' || (*line)[0] == '%') continue;
    for (std::string_view f : split_ws(*line)) nodes.push_back(remap.require(std::string(f)));
  }
  return nodes;
}

ReducedSystemRecord to_record(const ReducedSystem& rs, const Remap& remap) {
  ReducedSystemRecord record;
  record.n = rs.n();
  record.k = rs.k();
  record.a_hat = rs.dense_a_hat();
  record.driver_blocks.resize(rs.k());
  for (std::size_t l = 0; l < rs.k(); ++l) record.driver_blocks[l] = l;
  record.m_hat = rs.lo_hat;
  record.big_m_hat = rs.hi_hat;
  record.blocks.reserve(rs.n());
  for (std::size_t b = 0; b < rs.n(); ++b) {
    std::vector<std::string> labels;
    for (NodeId v : rs.blocks.block(b)) labels.push_back(remap.labels[v]);
    record.blocks.push_back(std::move(labels));
  }
  record.control_groups.reserve(rs.k());
  for (const auto& group : rs.control_groups) {
    std::vector<std::string> labels;
    for (std::size_t channel : group) labels.push_back(remap.labels[rs.driver_nodes[channel]]);
    record.control_groups.push_back(std::move(labels));
  }
  return record;
}

std::string reduced_system_json(const ReducedSystemRecord& record) {
  nlohmann::ordered_json j;
  j["n"] = record.n;
  j["k"] = record.k;
  j["A_hat"] = record.a_hat;
  j["B_hat_driver_blocks"] = record.driver_blocks;
  j["m_hat"] = record.m_hat;
  j["M_hat"] = record.big_m_hat;
  j["blocks"] = record.blocks;
  j["control_groups"] = record.control_groups;
  return j.dump(2) + "\n";
}

void write_reduced_system(const ReducedSystemRecord& record, const std::filesystem::path& path) {
  write_file(path, reduced_system_json(record));
}

void write_reduced_system(const ReducedSystem& rs, const Remap& remap,
                          const std::filesystem::path& path) {
  write_reduced_system(to_record(rs, remap), path);
}

ReducedSystemRecord read_reduced_system(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  try {
    ReducedSystemRecord record;
    record.n = j.at("n").get<std::size_t>();
    record.k = j.at("k").get<std::size_t>();
    record.a_hat = j.at("A_hat").get<std::vector<double>>();
    record.driver_blocks = j.at("B_hat_driver_blocks").get<std::vector<std::size_t>>();
    record.m_hat = j.at("m_hat").get<std::vector<double>>();
    record.big_m_hat = j.at("M_hat").get<std::vector<double>>();
    record.blocks = j.at("blocks").get<std::vector<std::vector<std::string>>>();
    record.control_groups = j.at("control_groups").get<std::vector<std::vector<std::string>>>();
    if (record.a_hat.size() != record.n * record.n || record.blocks.size() != record.n ||
        record.control_groups.size() != record.k || record.m_hat.size() != record.k ||
        record.big_m_hat.size() != record.k || record.driver_blocks.size() != record.k) {
      throw IoError(path.string() + ": inconsistent reduced-system dimensions");
    }
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    double parsed = 0.0;
    std::from_chars(buf, buf + std::strlen(buf), parsed);
    if (parsed == value) break;
  }
  return buf;
}

void write_control_csv(const ControlSignal& u, const std::filesystem::path& path) {
  std::string out = "t";
  for (std::size_t c = 1; c <= u.channels(); ++c) out += ",u" + std::to_string(c);
  out += '\n';
  for (std::size_t s = 0; s <= u.steps(); ++s) {
    out += format_double(static_cast<double>(s) * u.dt());
    std::size_t sample = std::min(s, u.steps() - 1);  // t = T repeats the last interval
    for (std::size_t c = 0; c < u.channels(); ++c) {
      out += ',';
      out += format_double(u.value(sample, c));
    }
    out += '\n';
  }
  write_file(path, out);
}

ControlSignal read_control_csv(const std::filesystem::path& path, std::vector<double> lo,
                               std::vector<double> hi) {
  std::string text = read_file(path);
  LineReader reader{text};
  auto header = reader.next();
  if (!header) throw IoError(path.string() + ": empty control file");
  std::size_t channels = 0;
  {
    std::string_view h = *header;
    channels = static_cast<std::size_t>(std::count(h.begin(), h.end(), ','));
    if (channels == 0 || !h.starts_with("t")) {
      throw IoError(path.string() + ":1: expected header t,u1..uK");
    }
  }
  std::vector<double> times;
  std::vector<double> values;
  while (auto line = reader.next()) {
    if (line->empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = *line;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (fields.size() != channels + 1) {
      throw IoError(path.string() + ":" + std::to_string(reader.line_no) +
                    ": expected " + std::to_string(channels + 1) + " fields");
    }
    times.push_back(parse_weight(fields[0], path.string(), reader.line_no));
    for (std::size_t c = 1; c <= channels; ++c) {
      values.push_back(parse_weight(fields[c], path.string(), reader.line_no));
    }
  }
  if (times.size() < 2) throw IoError(path.string() + ": control needs at least two grid points");
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw IoError(path.string() + ": non-uniform time grid");
    }
  }
  values.resize((times.size() - 1) * channels);  // drop the duplicated row at t = T
  return ControlSignal::from_samples(channels, dt, std::move(values), std::move(lo),
                                     std::move(hi));
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::string out = "t";
  for (std::size_t i = 1; i <= traj.dim; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (std::size_t s = 0; s <= traj.step_count(); ++s) {
    out += format_double(static_cast<double>(s) * traj.dt);
    for (double v : traj.at(s)) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace ctrleq
