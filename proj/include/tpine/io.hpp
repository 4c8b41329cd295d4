#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tpine/data.hpp"

namespace tpine {

namespace fs = std::filesystem;

/// Reads "u v" lines ('#' comments allowed). Duplicate undirected pairs are
/// merged and self-loops dropped; both are counted on the returned Graph.
/// `num_nodes` overrides the inferred 1 + max id, and must cover every id.
Graph load_edge_list(const fs::path& path, std::optional<Index> num_nodes = std::nullopt);

/// Reads "node feature [value]" lines; value defaults to 1. Zero values are
/// dropped. Bounds are inferred unless given; ids outside given bounds and
/// negative values are errors.
FeatureMatrix load_features(const fs::path& path,
                            std::optional<Index> num_nodes = std::nullopt,
                            std::optional<Index> num_features = std::nullopt);

/// Reads "node label" lines; repeated nodes accumulate labels.
LabelSet load_labels(const fs::path& path);

/// Widens `labels` to `num_nodes`, failing if any labeled node is out of range.
LabelSet align_labels(const LabelSet& labels, Index num_nodes);

void save_embeddings(const EmbeddingMatrix& emb, const fs::path& path);
EmbeddingMatrix load_embeddings(const fs::path& path);

/// Dense matrix in the embedding file layout ("rows cols" header). Used for
/// factor matrices, which may legitimately contain any finite values.
void save_matrix(const Matrix<double>& m, const fs::path& path);
Matrix<double> load_matrix(const fs::path& path);

/// Plain comma-separated dump, no header.
void save_csv(const Matrix<double>& m, const fs::path& path);

/// Writes "u v" lines.
void save_edge_list(const std::vector<std::pair<Index, Index>>& edges, const fs::path& path);

/// External string id <-> dense index table, one id per line in index order.
struct IdMap {
  std::vector<std::string> ids;

  std::optional<Index> find(const std::string& id) const;
};

IdMap load_id_map(const fs::path& path);
void save_id_map(const IdMap& map, const fs::path& path);

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace tpine
