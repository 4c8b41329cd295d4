#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tpine/data.hpp"
#include "tpine/factor_model.hpp"
#include "tpine/knn_view.hpp"

namespace tpine {

/// I x J x L tensor stored as L sparse frontal slices (views).
template <typename Scalar>
class Tensor3 {
 public:
  Tensor3() = default;

  /// All slices must share one shape; explicit zeros are dropped.
  explicit Tensor3(std::vector<SparseRows<Scalar>> views) : views_(std::move(views)) {
    if (views_.empty()) throw std::invalid_argument("tensor needs at least one view");
    for (auto& v : views_) {
      if (v.rows() != views_.front().rows() || v.cols() != views_.front().cols())
        throw std::invalid_argument("all views must have the same shape");
      v.prune(Scalar(0));
      v.makeCompressed();
    }
  }

  Index dim(int mode) const {
    switch (mode) {
      case 0: return views_.empty() ? 0 : views_.front().rows();
      case 1: return views_.empty() ? 0 : views_.front().cols();
      case 2: return static_cast<Index>(views_.size());
    }
    throw std::invalid_argument("mode must be 0, 1 or 2");
  }
  Index num_views() const { return dim(2); }
  const SparseRows<Scalar>& view(Index l) const { return views_.at(l); }
  const std::vector<SparseRows<Scalar>>& views() const { return views_; }

  Index nnz() const {
    Index n = 0;
    for (const auto& v : views_) n += v.nonZeros();
    return n;
  }

  long double squared_norm() const {
    long double s = 0;
    for (const auto& v : views_)
      for (Index k = 0; k < v.nonZeros(); ++k) s += static_cast<long double>(v.valuePtr()[k]) * v.valuePtr()[k];
    return s;
  }

 private:
  std::vector<SparseRows<Scalar>> views_;
};

/// Adjacency as view 0, K-NN matrix as view 1.
template <typename Scalar = double>
Tensor3<Scalar> stack_views(const Graph& adjacency, const KnnView& knn) {
  if (adjacency.num_nodes != knn.num_nodes)
    throw std::invalid_argument("graph has " + std::to_string(adjacency.num_nodes) +
                                " nodes but the K-NN view has " + std::to_string(knn.num_nodes));
  return Tensor3<Scalar>({adjacency_matrix<Scalar>(adjacency), knn.template matrix<Scalar>()});
}

/// Single-view tensor holding only the adjacency matrix.
template <typename Scalar = double>
Tensor3<Scalar> adjacency_only(const Graph& adjacency) {
  return Tensor3<Scalar>({adjacency_matrix<Scalar>(adjacency)});
}

/// Matricized tensor times Khatri-Rao product, X_(mode) (f2 ⊙ f1), where f1
/// and f2 are the factors of the two other modes in increasing mode order.
/// Works slice by slice on the sparse views; the Khatri-Rao product is never
/// formed.
template <typename Scalar, typename D1, typename D2>
Matrix<Scalar> mttkrp(const Tensor3<Scalar>& x, const Eigen::MatrixBase<D1>& f1,
                      const Eigen::MatrixBase<D2>& f2, int mode) {
  const Index d = f1.cols();
  auto expect = [&](Index got, Index want, const char* what) {
    if (got != want)
      throw std::invalid_argument(std::string("mttkrp: ") + what + " has " + std::to_string(got) +
                                  " rows, expected " + std::to_string(want));
  };
  if (f2.cols() != d) throw std::invalid_argument("mttkrp: factors differ in column count");
  switch (mode) {
    case 0: {
      expect(f1.rows(), x.dim(1), "f1");
      expect(f2.rows(), x.dim(2), "f2");
      Matrix<Scalar> out = Matrix<Scalar>::Zero(x.dim(0), d);
      for (Index l = 0; l < x.num_views(); ++l)
        out.noalias() += (x.view(l) * f1) * f2.row(l).asDiagonal();
      return out;
    }
    case 1: {
      expect(f1.rows(), x.dim(0), "f1");
      expect(f2.rows(), x.dim(2), "f2");
      Matrix<Scalar> out = Matrix<Scalar>::Zero(x.dim(1), d);
      for (Index l = 0; l < x.num_views(); ++l)
        out.noalias() += (x.view(l).transpose() * f1) * f2.row(l).asDiagonal();
      return out;
    }
    case 2: {
      expect(f1.rows(), x.dim(0), "f1");
      expect(f2.rows(), x.dim(1), "f2");
      Matrix<Scalar> out(x.num_views(), d);
      for (Index l = 0; l < x.num_views(); ++l)
        out.row(l) = (x.view(l) * f2).cwiseProduct(f1).colwise().sum();
      return out;
    }
  }
  throw std::invalid_argument("mttkrp: mode must be 0, 1 or 2");
}

/// Dense V x V slice sum_r scales(r) C(view, r) A(:,r) B(:,r)^T.
template <typename Scalar>
Matrix<Scalar> reconstruct_view(const FactorModel<Scalar>& model, Index view) {
  model.check_shapes();
  if (view < 0 || view >= model.num_views())
    throw std::invalid_argument("view " + std::to_string(view) + " out of range [0, " +
                                std::to_string(model.num_views()) + ")");
  const Vector<Scalar> w = model.scales.cwiseProduct(model.C.row(view).transpose());
  return model.A * w.asDiagonal() * model.B.transpose();
}

/// 1 - ||X - Xhat|| / ||X|| via ||X||^2 - 2<X, Xhat> + ||Xhat||^2, never
/// forming Xhat. The three terms are accumulated in long double so that an
/// exact model reports a fit within ~1e-9 of 1 despite the cancellation.
template <typename Scalar>
double fit(const Tensor3<Scalar>& x, const FactorModel<Scalar>& model) {
  using Acc = long double;
  model.check_shapes();
  if (model.A.rows() != x.dim(0) || model.B.rows() != x.dim(1) || model.C.rows() != x.dim(2))
    throw std::invalid_argument("fit: model shape does not match tensor");
  const Acc norm_x = x.squared_norm();
  if (norm_x == 0) throw std::invalid_argument("fit: tensor has zero norm");

  const Index d = model.rank();
  const Matrix<Acc> A = model.A.template cast<Acc>();
  const Matrix<Acc> B = model.B.template cast<Acc>();
  const Matrix<Acc> C = model.C.template cast<Acc>();
  const Vector<Acc> s = model.scales.template cast<Acc>();

  Acc inner = 0;
  Vector<Acc> weights(d);
  for (Index l = 0; l < x.num_views(); ++l) {
    weights = s.cwiseProduct(C.row(l).transpose());
    const auto& v = x.view(l);
    for (Index i = 0; i < v.outerSize(); ++i)
      for (typename SparseRows<Scalar>::InnerIterator it(v, i); it; ++it) {
        Acc model_value = 0;
        for (Index r = 0; r < d; ++r) model_value += weights(r) * A(i, r) * B(it.col(), r);
        inner += static_cast<Acc>(it.value()) * model_value;
      }
  }
  const Matrix<Acc> gram = (A.transpose() * A).cwiseProduct(B.transpose() * B).cwiseProduct(C.transpose() * C);
  const Acc norm_model = s.dot(gram * s);

  Acc residual = norm_x - 2 * inner + norm_model;
  if (residual < 0) residual = 0;
  return static_cast<double>(1 - std::sqrt(residual) / std::sqrt(norm_x));
}

}  // namespace tpine
