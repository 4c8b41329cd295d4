#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "tpine/data.hpp"
#include "tpine/errors.hpp"
#include "tpine/factor_model.hpp"

namespace tpine {

enum class EmbeddingSource { A, B, AConcatB };

inline EmbeddingSource parse_embedding_source(const std::string& s) {
  if (s == "A") return EmbeddingSource::A;
  if (s == "B") return EmbeddingSource::B;
  if (s == "A-concat-B" || s == "AB") return EmbeddingSource::AConcatB;
  throw std::invalid_argument("unknown embedding source '" + s + "' (expected A, B or A-concat-B)");
}

inline std::string to_string(EmbeddingSource s) {
  switch (s) {
    case EmbeddingSource::A: return "A";
    case EmbeddingSource::B: return "B";
    case EmbeddingSource::AConcatB: return "A-concat-B";
  }
  return "?";
}

/// Node embeddings from the canonical factors with component scales applied,
/// so column magnitudes carry component importance.
template <typename Scalar>
EmbeddingMatrix extract_embeddings(const FactorModel<Scalar>& model,
                                   EmbeddingSource source = EmbeddingSource::A) {
  const auto m = normalized(model);
  const Matrix<double> a = (m.A * m.scales.asDiagonal()).template cast<double>();
  const Matrix<double> b = (m.B * m.scales.asDiagonal()).template cast<double>();
  switch (source) {
    case EmbeddingSource::A: return EmbeddingMatrix(a);
    case EmbeddingSource::B: return EmbeddingMatrix(b);
    case EmbeddingSource::AConcatB: {
      Matrix<double> ab(a.rows(), a.cols() + b.cols());
      ab << a, b;
      return EmbeddingMatrix(std::move(ab));
    }
  }
  throw std::invalid_argument("bad embedding source");
}

struct PrunedEmbedding {
  EmbeddingMatrix embedding;
  std::vector<Index> removed;
  std::vector<Index> kept;
};

/// Drops every dimension r whose largest view weight max_l |scale_r C(l,r)|
/// is below `threshold`. Surviving columns keep their order. `emb` must have
/// one column per model component (source A or B).
template <typename Scalar>
PrunedEmbedding prune_dimensions(const EmbeddingMatrix& emb, const FactorModel<Scalar>& model,
                                 double threshold) {
  if (!(threshold >= 0)) throw std::invalid_argument("prune threshold must be >= 0");
  if (emb.dim() != model.rank())
    throw std::invalid_argument("embedding has " + std::to_string(emb.dim()) + " dims but the model has rank " +
                                std::to_string(model.rank()));
  const Vector<double> weight =
      component_view_weights(model).colwise().maxCoeff().transpose().template cast<double>();
  PrunedEmbedding out;
  for (Index r = 0; r < model.rank(); ++r) (weight(r) < threshold ? out.removed : out.kept).push_back(r);
  if (out.kept.empty())
    throw NumericalError("pruning at threshold " + std::to_string(threshold) + " removes all " +
                         std::to_string(model.rank()) + " dimensions");
  out.embedding = EmbeddingMatrix(emb.matrix()(Eigen::all, out.kept));
  return out;
}

}  // namespace tpine
