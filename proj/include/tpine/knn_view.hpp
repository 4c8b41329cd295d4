#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tpine/data.hpp"

namespace tpine {

/// Dense pairwise cosine similarities with a zero diagonal.
template <typename Scalar>
struct SimilarityMatrix {
  Matrix<Scalar> values;

  Index num_nodes() const { return values.rows(); }
};

/// Directed K-nearest-neighbour view. `out_edges[v]` lists the selected
/// neighbours of v in decreasing similarity (ties: lower id first).
struct KnnView {
  Index num_nodes = 0;
  Index k = 0;
  std::vector<std::vector<Index>> out_edges;

  Index num_edges() const {
    Index n = 0;
    for (const auto& row : out_edges) n += static_cast<Index>(row.size());
    return n;
  }

  /// Nodes whose out-degree fell short of k.
  std::vector<Index> short_nodes() const {
    std::vector<Index> out;
    for (Index v = 0; v < num_nodes; ++v)
      if (static_cast<Index>(out_edges[v].size()) < k) out.push_back(v);
    return out;
  }

  std::vector<std::pair<Index, Index>> edges() const {
    std::vector<std::pair<Index, Index>> out;
    out.reserve(num_edges());
    for (Index v = 0; v < num_nodes; ++v)
      for (Index u : out_edges[v]) out.emplace_back(v, u);
    return out;
  }

  /// Binary V x V matrix, Z(v, u) = 1 for each selected u.
  template <typename Scalar = double>
  SparseRows<Scalar> matrix() const {
    std::vector<Eigen::Triplet<Scalar>> triplets;
    triplets.reserve(num_edges());
    for (Index v = 0; v < num_nodes; ++v)
      for (Index u : out_edges[v]) triplets.emplace_back(v, u, Scalar(1));
    SparseRows<Scalar> z(num_nodes, num_nodes);
    z.setFromTriplets(triplets.begin(), triplets.end());
    return z;
  }
};

namespace detail {

// Row-at-a-time cosine kernel. Both the dense and the blocked paths go
// through `row()`, so they agree bit for bit; accumulating over the shared
// features in ascending feature order also makes sim(i,j) == sim(j,i) exactly.
template <typename Scalar>
class CosineRows {
 public:
  template <typename Derived>
  explicit CosineRows(const Eigen::SparseMatrixBase<Derived>& features)
      : by_row_(features.derived()), by_col_(features.derived()), norms_(by_row_.rows()) {
    by_row_.makeCompressed();
    by_col_.makeCompressed();
    for (Index i = 0; i < by_row_.rows(); ++i) {
      Scalar sq(0);
      for (typename SparseRows<Scalar>::InnerIterator it(by_row_, i); it; ++it)
        sq += it.value() * it.value();
      norms_(i) = std::sqrt(sq);
    }
  }

  Index num_nodes() const { return by_row_.rows(); }

  template <typename Out>
  void row(Index i, Out&& out) const {
    out.setZero();
    if (norms_(i) == Scalar(0)) return;
    for (typename SparseRows<Scalar>::InnerIterator fi(by_row_, i); fi; ++fi) {
      const Scalar a = fi.value();
      for (typename Eigen::SparseMatrix<Scalar>::InnerIterator nj(by_col_, fi.col()); nj; ++nj)
        out(nj.row()) += a * nj.value();
    }
    for (Index j = 0; j < num_nodes(); ++j) {
      if (out(j) == Scalar(0)) continue;
      out(j) = norms_(j) == Scalar(0) ? Scalar(0)
                                      : std::min(Scalar(1), out(j) / (norms_(i) * norms_(j)));
    }
    out(i) = Scalar(0);
  }

 private:
  SparseRows<Scalar> by_row_;
  Eigen::SparseMatrix<Scalar> by_col_;
  Vector<Scalar> norms_;
};

template <typename RowExpr>
std::vector<Index> select_row(const RowExpr& sim, Index k) {
  std::vector<Index> candidates;
  for (Index j = 0; j < sim.size(); ++j)
    if (sim(j) > 0) candidates.push_back(j);
  const auto take = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(k));
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(),
                    [&](Index a, Index b) { return sim(a) > sim(b) || (sim(a) == sim(b) && a < b); });
  candidates.resize(take);
  return candidates;
}

inline void check_k(Index k, Index num_nodes) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (k >= num_nodes)
    throw std::invalid_argument("k = " + std::to_string(k) + " needs at least k + 1 nodes, have " +
                                std::to_string(num_nodes));
}

}  // namespace detail

/// Cosine similarity between every pair of feature rows, diagonal zeroed.
/// Pairs involving an all-zero row get similarity 0.
template <typename Derived>
SimilarityMatrix<typename Derived::Scalar> cosine_similarity(
    const Eigen::SparseMatrixBase<Derived>& features) {
  using Scalar = typename Derived::Scalar;
  if (features.rows() < 2) throw std::invalid_argument("cosine_similarity needs >= 2 nodes");
  detail::CosineRows<Scalar> rows(features);
  SimilarityMatrix<Scalar> sim{Matrix<Scalar>(rows.num_nodes(), rows.num_nodes())};
  Vector<Scalar> buf(rows.num_nodes());
  for (Index i = 0; i < rows.num_nodes(); ++i) {
    rows.row(i, buf);
    sim.values.row(i) = buf.transpose();
  }
  return sim;
}

inline SimilarityMatrix<double> cosine_similarity(const FeatureMatrix& features) {
  return cosine_similarity(features.values);
}

/// For each row keeps the k largest strictly positive similarities.
/// Rows with fewer positive entries keep all of them.
template <typename Scalar>
KnnView top_k_select(const SimilarityMatrix<Scalar>& sim, Index k) {
  detail::check_k(k, sim.num_nodes());
  KnnView view{sim.num_nodes(), k, {}};
  view.out_edges.reserve(sim.num_nodes());
  for (Index i = 0; i < sim.num_nodes(); ++i)
    view.out_edges.push_back(detail::select_row(sim.values.row(i), k));
  return view;
}

/// top_k_select(cosine_similarity(F), k) computed one row at a time, so
/// memory stays O(V) instead of O(V^2).
template <typename Derived>
KnnView build_knn_view(const Eigen::SparseMatrixBase<Derived>& features, Index k) {
  using Scalar = typename Derived::Scalar;
  if (features.rows() < 2) throw std::invalid_argument("build_knn_view needs >= 2 nodes");
  detail::check_k(k, features.rows());
  detail::CosineRows<Scalar> rows(features);
  KnnView view{rows.num_nodes(), k, {}};
  view.out_edges.reserve(rows.num_nodes());
  Vector<Scalar> buf(rows.num_nodes());
  for (Index i = 0; i < rows.num_nodes(); ++i) {
    rows.row(i, buf);
    view.out_edges.push_back(detail::select_row(buf, k));
  }
  return view;
}

inline KnnView build_knn_view(const FeatureMatrix& features, Index k) {
  return build_knn_view(features.values, k);
}

}  // namespace tpine
