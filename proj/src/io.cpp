#include "tpine/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tpine/errors.hpp"

namespace tpine {

EmbeddingMatrix::EmbeddingMatrix(Matrix<double> rows) : rows_(std::move(rows)) {
  if (rows_.cols() < 1) throw std::invalid_argument("embedding must have dim >= 1");
  if (!rows_.allFinite()) throw NumericalError("embedding contains non-finite values");
}

namespace {

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// Splits on blanks, ignoring everything from '#' on; returns false when the
// line holds no fields.
bool tokenize(const std::string& line, std::vector<std::string_view>& tokens) {
  tokens.clear();
  std::string_view rest(line);
  rest = rest.substr(0, rest.find('#'));
  while (!rest.empty()) {
    auto start = rest.find_first_not_of(" \t\r");
    if (start == std::string_view::npos) break;
    rest.remove_prefix(start);
    auto end = rest.find_first_of(" \t\r");
    tokens.push_back(rest.substr(0, end));
    if (end == std::string_view::npos) break;
    rest.remove_prefix(end);
  }
  return !tokens.empty();
}

Index parse_id(std::string_view tok, const fs::path& path, std::size_t line) {
  Index value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DataError(where(path, line) + ": expected integer id, got '" + std::string(tok) + "'");
  if (value < 0)
    throw DataError(where(path, line) + ": negative id " + std::string(tok));
  return value;
}

double parse_real(std::string_view tok, const fs::path& path, std::size_t line) {
  double value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw DataError(where(path, line) + ": expected number, got '" + std::string(tok) + "'");
  return value;
}

void write_matrix(const Matrix<double>& m, const fs::path& path) {
  auto out = open_output(path);
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Matrix<double> read_matrix(const fs::path& path) {
  auto in = open_input(path);
  std::string line;
  std::vector<std::string_view> tokens;
  std::size_t lineno = 0;
  Index rows = -1, cols = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!tokenize(line, tokens)) continue;
    if (tokens.size() != 2) throw DataError(where(path, lineno) + ": expected header 'rows cols'");
    rows = parse_id(tokens[0], path, lineno);
    cols = parse_id(tokens[1], path, lineno);
    break;
  }
  if (rows < 0) throw DataError(path.string() + ": missing header");
  Matrix<double> m(rows, cols);
  Index r = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!tokenize(line, tokens)) continue;
    if (r >= rows) throw DataError(where(path, lineno) + ": more rows than header declares");
    if (static_cast<Index>(tokens.size()) != cols)
      throw DataError(where(path, lineno) + ": expected " + std::to_string(cols) + " values, got " +
                      std::to_string(tokens.size()));
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_real(tokens[c], path, lineno);
    ++r;
  }
  if (r != rows)
    throw DataError(path.string() + ": header declares " + std::to_string(rows) + " rows, found " +
                    std::to_string(r));
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

Graph load_edge_list(const fs::path& path, std::optional<Index> num_nodes) {
  auto in = open_input(path);
  std::set<std::pair<Index, Index>> unique;
  Graph g;
  Index max_id = -1;
  std::size_t lineno = 0, data_lines = 0;
  std::string line;
  std::vector<std::string_view> tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (!tokenize(line, tokens)) continue;
    if (tokens.size() != 2)
      throw DataError(where(path, lineno) + ": expected 'u v', got " + std::to_string(tokens.size()) +
                      " fields");
    Index u = parse_id(tokens[0], path, lineno);
    Index v = parse_id(tokens[1], path, lineno);
    ++data_lines;
    max_id = std::max({max_id, u, v});
    if (u == v) {
      ++g.self_loops_dropped;
      continue;
    }
    if (!unique.emplace(std::min(u, v), std::max(u, v)).second) ++g.duplicates_dropped;
  }
  if (data_lines == 0) throw DataError(path.string() + ": empty edge list");
  g.num_nodes = max_id + 1;
  if (num_nodes) {
    if (*num_nodes < g.num_nodes)
      throw DataError(path.string() + ": node id " + std::to_string(max_id) +
                      " exceeds declared node count " + std::to_string(*num_nodes));
    g.num_nodes = *num_nodes;
  }
  g.edges.assign(unique.begin(), unique.end());
  return g;
}

FeatureMatrix load_features(const fs::path& path, std::optional<Index> num_nodes,
                            std::optional<Index> num_features) {
  auto in = open_input(path);
  std::vector<Eigen::Triplet<double>> triplets;
  Index max_node = -1, max_feature = -1;
  std::size_t lineno = 0, data_lines = 0;
  std::string line;
  std::vector<std::string_view> tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (!tokenize(line, tokens)) continue;
    if (tokens.size() != 2 && tokens.size() != 3)
      throw DataError(where(path, lineno) + ": expected 'node feature [value]'");
    Index node = parse_id(tokens[0], path, lineno);
    Index feature = parse_id(tokens[1], path, lineno);
    double value = tokens.size() == 3 ? parse_real(tokens[2], path, lineno) : 1.0;
    ++data_lines;
    if (!std::isfinite(value) || value < 0)
      throw DataError(where(path, lineno) + ": feature values must be finite and nonnegative");
    if (num_nodes && node >= *num_nodes)
      throw DataError(where(path, lineno) + ": node " + std::to_string(node) + " out of bounds");
    if (num_features && feature >= *num_features)
      throw DataError(where(path, lineno) + ": feature " + std::to_string(feature) + " out of bounds");
    max_node = std::max(max_node, node);
    max_feature = std::max(max_feature, feature);
    if (value != 0) triplets.emplace_back(node, feature, value);
  }
  if (data_lines == 0) throw DataError(path.string() + ": empty feature file");
  FeatureMatrix f;
  f.values.resize(num_nodes.value_or(max_node + 1), num_features.value_or(max_feature + 1));
  // Repeated (node, feature) lines keep the last value rather than summing.
  f.values.setFromTriplets(triplets.begin(), triplets.end(),
                           [](const double&, const double& b) { return b; });
  f.values.prune(0.0);
  return f;
}

LabelSet load_labels(const fs::path& path) {
  auto in = open_input(path);
  std::vector<std::pair<Index, Index>> pairs;
  std::size_t lineno = 0;
  std::string line;
  std::vector<std::string_view> tokens;
  LabelSet labels;
  while (std::getline(in, line)) {
    ++lineno;
    if (!tokenize(line, tokens)) continue;
    if (tokens.size() != 2) throw DataError(where(path, lineno) + ": expected 'node label'");
    Index node = parse_id(tokens[0], path, lineno);
    Index label = parse_id(tokens[1], path, lineno);
    pairs.emplace_back(node, label);
    labels.num_nodes = std::max(labels.num_nodes, node + 1);
    labels.num_labels = std::max(labels.num_labels, label + 1);
  }
  if (pairs.empty()) throw DataError(path.string() + ": empty label file");
  labels.assignments.resize(labels.num_nodes);
  for (const auto& [node, label] : pairs) labels.assignments[node].push_back(label);
  for (auto& set : labels.assignments) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }
  return labels;
}

LabelSet align_labels(const LabelSet& labels, Index num_nodes) {
  if (labels.num_nodes > num_nodes)
    throw DataError("label file references node " + std::to_string(labels.num_nodes - 1) +
                    " but the graph has " + std::to_string(num_nodes) + " nodes");
  LabelSet out = labels;
  out.num_nodes = num_nodes;
  out.assignments.resize(num_nodes);
  return out;
}

void save_embeddings(const EmbeddingMatrix& emb, const fs::path& path) {
  if (emb.dim() < 1) throw std::invalid_argument("cannot save an embedding with dim 0");
  write_matrix(emb.matrix(), path);
}

EmbeddingMatrix load_embeddings(const fs::path& path) {
  auto m = read_matrix(path);
  if (m.cols() < 1) throw DataError(path.string() + ": embedding dim must be >= 1");
  if (!m.allFinite()) throw DataError(path.string() + ": non-finite embedding value");
  return EmbeddingMatrix(std::move(m));
}

void save_matrix(const Matrix<double>& m, const fs::path& path) { write_matrix(m, path); }

Matrix<double> load_matrix(const fs::path& path) { return read_matrix(path); }

void save_csv(const Matrix<double>& m, const fs::path& path) {
  auto out = open_output(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void save_edge_list(const std::vector<std::pair<Index, Index>>& edges, const fs::path& path) {
  auto out = open_output(path);
  for (const auto& [u, v] : edges) out << u << ' ' << v << '\n';
}

std::optional<Index> IdMap::find(const std::string& id) const {
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) return std::nullopt;
  return static_cast<Index>(it - ids.begin());
}

IdMap load_id_map(const fs::path& path) {
  auto in = open_input(path);
  IdMap map;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw DataError(where(path, lineno) + ": blank id");
    if (!seen.emplace(line, lineno).second) throw DataError(where(path, lineno) + ": duplicate id " + line);
    map.ids.push_back(line);
  }
  return map;
}

void save_id_map(const IdMap& map, const fs::path& path) {
  auto out = open_output(path);
  for (const auto& id : map.ids) out << id << '\n';
}

}  // namespace tpine
