#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tpine/data.hpp"

namespace tpine {

/// Three-way CP model  X ~ sum_r scales(r) * A(:,r) o B(:,r) o C(:,r).
///
/// A and B index nodes (V x d), C indexes views (L x d). In canonical form
/// (see `normalized`) every column of A, B and C has unit norm and the
/// component magnitude lives in `scales`, which is strictly positive.
template <typename Scalar>
struct FactorModel {
  Matrix<Scalar> A;
  Matrix<Scalar> B;
  Matrix<Scalar> C;
  Vector<Scalar> scales;
  std::vector<double> fit_history;
  bool converged = false;
  int iterations = 0;

  Index rank() const { return A.cols(); }
  Index num_nodes() const { return A.rows(); }
  Index num_views() const { return C.rows(); }

  void check_shapes() const {
    if (B.cols() != A.cols() || C.cols() != A.cols() || scales.size() != A.cols())
      throw std::invalid_argument("factor model: inconsistent rank across A, B, C, scales");
    if (A.cols() < 1) throw std::invalid_argument("factor model: rank must be >= 1");
  }
};

/// Same model with unit-norm columns in A, B and C and the products of the
/// column norms moved into `scales`. Signs stay in the factors. A component
/// with a zero column anywhere becomes a zero C column with scale 1.
template <typename Scalar>
FactorModel<Scalar> normalized(FactorModel<Scalar> m) {
  m.check_shapes();
  for (Index r = 0; r < m.rank(); ++r) {
    const Scalar na = m.A.col(r).norm(), nb = m.B.col(r).norm(), nc = m.C.col(r).norm();
    const Scalar s = m.scales(r) * na * nb * nc;
    if (s == Scalar(0)) {
      if (na > 0) m.A.col(r) /= na;
      if (nb > 0) m.B.col(r) /= nb;
      m.C.col(r).setZero();
      m.scales(r) = Scalar(1);
      continue;
    }
    m.A.col(r) /= na;
    m.B.col(r) /= nb;
    m.C.col(r) /= nc;
    if (s < 0) m.C.col(r) = -m.C.col(r);
    m.scales(r) = std::abs(s);
  }
  return m;
}

/// |scales(r) * C(l, r)| after canonicalization: the weight each view puts
/// on each component, independent of how magnitude is spread over factors.
template <typename Scalar>
Matrix<Scalar> component_view_weights(const FactorModel<Scalar>& model) {
  const auto m = normalized(model);
  return (m.C * m.scales.asDiagonal()).cwiseAbs();
}

/// Keeps only the listed components, in the given order.
template <typename Scalar>
FactorModel<Scalar> select_components(const FactorModel<Scalar>& m, const std::vector<Index>& keep) {
  FactorModel<Scalar> out;
  out.A = m.A(Eigen::all, keep);
  out.B = m.B(Eigen::all, keep);
  out.C = m.C(Eigen::all, keep);
  out.scales = m.scales(keep);
  out.fit_history = m.fit_history;
  out.converged = m.converged;
  out.iterations = m.iterations;
  return out;
}

}  // namespace tpine
