#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include "tpine/errors.hpp"
#include "tpine/factor_model.hpp"
#include "tpine/random.hpp"
#include "tpine/tensor.hpp"

namespace tpine {

enum class InitMethod { RandomUniform, RandomNormal };

struct AlsConfig {
  Index rank = 128;
  int max_iters = 100;
  double tol = 1e-6;  // on |fit_t - fit_{t-1}|
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::RandomUniform;

  void validate() const {
    if (rank < 1) throw std::invalid_argument("rank must be >= 1");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(tol > 0)) throw std::invalid_argument("tol must be > 0");
  }
};

struct TensorDims {
  Index I = 0, J = 0, L = 0;
};

/// Random starting factors, filled A then B then C in column-major order
/// from one seeded stream. Scales start at 1.
template <typename Scalar = double>
FactorModel<Scalar> init_factors(TensorDims dims, const AlsConfig& config) {
  config.validate();
  Rng rng(config.seed);
  auto draw = [&]() -> Scalar {
    return static_cast<Scalar>(config.init == InitMethod::RandomUniform ? rng.uniform() : rng.normal());
  };
  auto fill = [&](Index rows) {
    Matrix<Scalar> m(rows, config.rank);
    for (Index c = 0; c < m.cols(); ++c)
      for (Index r = 0; r < m.rows(); ++r) m(r, c) = draw();
    return m;
  };
  FactorModel<Scalar> model;
  model.A = fill(dims.I);
  model.B = fill(dims.J);
  model.C = fill(dims.L);
  model.scales = Vector<Scalar>::Ones(config.rank);
  return model;
}

template <typename Scalar = double>
FactorModel<Scalar> init_factors(const Tensor3<Scalar>& x, const AlsConfig& config) {
  return init_factors<Scalar>({x.dim(0), x.dim(1), x.dim(2)}, config);
}

namespace detail {

// Solves F * gram = rhs for F with gram symmetric positive semidefinite.
// Cholesky when well conditioned; otherwise a ridge of 1e-12 * trace and a
// complete orthogonal decomposition (minimum-norm least squares).
template <typename Scalar>
Matrix<Scalar> solve_gram(const Matrix<Scalar>& rhs, const Matrix<Scalar>& gram) {
  Eigen::LLT<Matrix<Scalar>> llt(gram);
  if (llt.info() == Eigen::Success && llt.rcond() > Scalar(1e-12))
    return llt.solve(rhs.transpose()).transpose();
  Matrix<Scalar> ridged = gram;
  ridged.diagonal().array() += Scalar(1e-12) * gram.trace();
  return ridged.completeOrthogonalDecomposition().solve(rhs.transpose()).transpose();
}

// Unit-normalizes columns in place and returns the norms (zero columns are
// left alone and report norm 1).
template <typename Scalar>
Vector<Scalar> normalize_columns(Matrix<Scalar>& m) {
  Vector<Scalar> norms = m.colwise().norm().transpose();
  for (Index r = 0; r < m.cols(); ++r) {
    if (norms(r) == Scalar(0)) {
      norms(r) = Scalar(1);
      continue;
    }
    m.col(r) /= norms(r);
  }
  return norms;
}

}  // namespace detail

/// One Gauss-Seidel sweep of the normal equations, A then B then C, each
/// solve using the freshest other factors:
///   A <- X_(0) (C ⊙ B) (B'B * C'C)^+
///   B <- X_(1) (C ⊙ A) (A'A * C'C)^+
///   C <- X_(2) (B ⊙ A) (A'A * B'B)^+
/// Returns the model in canonical (normalized) form.
template <typename Scalar>
FactorModel<Scalar> als_step(const Tensor3<Scalar>& x, const FactorModel<Scalar>& model) {
  model.check_shapes();
  if (model.A.rows() != x.dim(0) || model.B.rows() != x.dim(1) || model.C.rows() != x.dim(2))
    throw std::invalid_argument("als_step: model shape does not match tensor");

  FactorModel<Scalar> next = model;
  Matrix<Scalar> weighted_c = model.C * model.scales.asDiagonal();
  const Matrix<Scalar> gram_c = weighted_c.transpose() * weighted_c;

  next.A = detail::solve_gram<Scalar>(mttkrp(x, next.B, weighted_c, 0),
                                      (next.B.transpose() * next.B).cwiseProduct(gram_c));
  weighted_c = weighted_c * detail::normalize_columns(next.A).asDiagonal();

  next.B = detail::solve_gram<Scalar>(mttkrp(x, next.A, weighted_c, 1),
                                      (next.A.transpose() * next.A).cwiseProduct(weighted_c.transpose() * weighted_c));
  detail::normalize_columns(next.B);

  next.C = detail::solve_gram<Scalar>(mttkrp(x, next.A, next.B, 2),
                                      (next.A.transpose() * next.A).cwiseProduct(next.B.transpose() * next.B));
  next.scales.setOnes();

  if (!next.A.allFinite() || !next.B.allFinite() || !next.C.allFinite())
    throw NumericalError("ALS update produced non-finite factors");
  return normalized(std::move(next));
}

/// Runs als_step until the fit changes by less than `tol` or `max_iters`
/// sweeps have run. Hitting the iteration cap is reported through
/// `converged == false`, not an exception.
template <typename Scalar>
FactorModel<Scalar> decompose(const Tensor3<Scalar>& x, const AlsConfig& config) {
  config.validate();
  if (x.nnz() == 0) throw std::invalid_argument("decompose: tensor has no nonzero entries");
  auto model = init_factors(x, config);
  double previous = fit(x, model);
  for (int it = 1; it <= config.max_iters; ++it) {
    auto history = std::move(model.fit_history);
    model = als_step(x, model);
    const double current = fit(x, model);
    history.push_back(current);
    model.fit_history = std::move(history);
    model.iterations = it;
    if (std::abs(current - previous) < config.tol) {
      model.converged = true;
      break;
    }
    previous = current;
  }
  return model;
}

}  // namespace tpine
