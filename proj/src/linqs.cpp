#include "tpine/linqs.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

#include "tpine/errors.hpp"

namespace tpine {

namespace fs = std::filesystem;

namespace {

struct ContentRow {
  std::string id;
  std::vector<Index> words;
  std::string label;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string f; in >> f;) fields.push_back(f);
  return fields;
}

}  // namespace

LinqsDataset read_linqs(const std::vector<fs::path>& content_files, const std::vector<fs::path>& cites_files) {
  if (content_files.empty()) throw DataError("no .content files given");
  std::vector<ContentRow> rows;
  std::optional<std::size_t> width;
  for (const auto& path : content_files) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (fields.size() < 3) throw DataError(path.string() + ":" + std::to_string(lineno) + ": too few fields");
      const std::size_t num_words = fields.size() - 2;
      if (width && *width != num_words)
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(*width) +
                        " word flags, got " + std::to_string(num_words));
      width = num_words;
      ContentRow row{fields.front(), {}, fields.back()};
      for (std::size_t w = 0; w < num_words; ++w) {
        const auto& flag = fields[w + 1];
        if (flag != "0" && flag != "0.0") row.words.push_back(static_cast<Index>(w));
      }
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw DataError("no content rows found");

  LinqsDataset data;
  std::unordered_map<std::string, Index> index;
  std::set<std::string> label_names;
  for (const auto& row : rows) {
    if (!index.emplace(row.id, static_cast<Index>(data.nodes.ids.size())).second)
      throw DataError("duplicate node id '" + row.id + "' in content files");
    data.nodes.ids.push_back(row.id);
    label_names.insert(row.label);
  }
  data.label_names.assign(label_names.begin(), label_names.end());
  std::map<std::string, Index> label_index;
  for (std::size_t i = 0; i < data.label_names.size(); ++i) label_index[data.label_names[i]] = static_cast<Index>(i);

  const auto n = static_cast<Index>(rows.size());
  std::vector<Eigen::Triplet<double>> triplets;
  data.labels.num_nodes = n;
  data.labels.num_labels = static_cast<Index>(data.label_names.size());
  data.labels.assignments.resize(n);
  for (Index v = 0; v < n; ++v) {
    for (Index w : rows[v].words) triplets.emplace_back(v, w, 1.0);
    data.labels.assignments[v] = {label_index[rows[v].label]};
  }
  data.features.values.resize(n, static_cast<Index>(*width));
  data.features.values.setFromTriplets(triplets.begin(), triplets.end());

  std::set<std::pair<Index, Index>> edges;
  data.graph.num_nodes = n;
  for (const auto& path : cites_files) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto fields = split_fields(line);
      if (fields.empty()) continue;
      if (fields.size() != 2) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 2 ids");
      auto a = index.find(fields[0]), b = index.find(fields[1]);
      if (a == index.end() || b == index.end()) {
        ++data.dangling_citations;
        continue;
      }
      if (a->second == b->second) {
        ++data.graph.self_loops_dropped;
        continue;
      }
      if (!edges.emplace(std::min(a->second, b->second), std::max(a->second, b->second)).second)
        ++data.graph.duplicates_dropped;
    }
  }
  data.graph.edges.assign(edges.begin(), edges.end());
  return data;
}

void write_dataset(const LinqsDataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  save_edge_list(data.graph.edges, dir / "edges.txt");
  {
    std::ofstream out(dir / "features.txt", std::ios::trunc);
    for (Index v = 0; v < data.features.values.outerSize(); ++v)
      for (SparseRows<double>::InnerIterator it(data.features.values, v); it; ++it) {
        out << v << ' ' << it.col();
        if (it.value() != 1.0) out << ' ' << format_double(it.value());
        out << '\n';
      }
  }
  {
    std::ofstream out(dir / "labels.txt", std::ios::trunc);
    for (Index v = 0; v < data.labels.num_nodes; ++v)
      for (Index l : data.labels.assignments[v]) out << v << ' ' << l << '\n';
  }
  save_id_map(data.nodes, dir / "nodes.txt");
  std::ofstream out(dir / "label_names.txt", std::ios::trunc);
  for (const auto& name : data.label_names) out << name << '\n';
}

}  // namespace tpine
