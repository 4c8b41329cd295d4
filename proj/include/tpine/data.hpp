#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace tpine {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using SparseRows = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

/// Undirected, unweighted graph over dense 0-based node ids.
///
/// `edges` holds each undirected pair once as (min, max), sorted, with no
/// self-loops.
struct Graph {
  Index num_nodes = 0;
  std::vector<std::pair<Index, Index>> edges;
  Index self_loops_dropped = 0;
  Index duplicates_dropped = 0;

  friend bool operator==(const Graph&, const Graph&) = default;
};

/// Symmetric 0/1 adjacency matrix with zero diagonal.
template <typename Scalar = double>
SparseRows<Scalar> adjacency_matrix(const Graph& g) {
  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(2 * g.edges.size());
  for (const auto& [u, v] : g.edges) {
    triplets.emplace_back(u, v, Scalar(1));
    triplets.emplace_back(v, u, Scalar(1));
  }
  SparseRows<Scalar> y(g.num_nodes, g.num_nodes);
  y.setFromTriplets(triplets.begin(), triplets.end());
  return y;
}

/// Sparse nonnegative node-by-feature matrix, one row per node.
struct FeatureMatrix {
  SparseRows<double> values;

  Index num_nodes() const { return values.rows(); }
  Index num_features() const { return values.cols(); }
};

/// Per-node label sets. A node with an empty set is unlabeled.
struct LabelSet {
  Index num_nodes = 0;
  Index num_labels = 0;
  std::vector<std::vector<Index>> assignments;

  bool is_labeled(Index node) const { return !assignments[node].empty(); }
  std::vector<Index> labeled_nodes() const {
    std::vector<Index> out;
    for (Index v = 0; v < num_nodes; ++v)
      if (is_labeled(v)) out.push_back(v);
    return out;
  }
};

/// Dense node embeddings: one row per node, `dim()` columns.
///
/// Construction checks that every entry is finite and that dim >= 1.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  explicit EmbeddingMatrix(Matrix<double> rows);

  const Matrix<double>& matrix() const { return rows_; }
  Index num_nodes() const { return rows_.rows(); }
  Index dim() const { return rows_.cols(); }
  auto row(Index v) const { return rows_.row(v); }

  friend bool operator==(const EmbeddingMatrix& a, const EmbeddingMatrix& b) {
    return a.rows_.rows() == b.rows_.rows() && a.rows_.cols() == b.rows_.cols() &&
           a.rows_ == b.rows_;
  }

 private:
  Matrix<double> rows_;
};

}  // namespace tpine
