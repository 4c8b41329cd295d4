#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "json.hpp"
#include "tpine/data.hpp"
#include "tpine/embedding.hpp"
#include "tpine/eval.hpp"
#include "tpine/factor_model.hpp"

namespace tpine {

/// L x d table of view weights |scale_r C(l, r)| on the canonical model.
struct ViewWeightTable {
  Matrix<double> weights;
  std::optional<double> threshold;

  Index num_views() const { return weights.rows(); }
  Index num_dims() const { return weights.cols(); }
};

template <typename Scalar>
ViewWeightTable view_weights(const FactorModel<Scalar>& model, std::optional<double> threshold = std::nullopt) {
  return {component_view_weights(model).template cast<double>(), threshold};
}

/// CSV with one row per dimension: "dimension,view_0,...,view_{L-1}", plus
/// "max_weight,kept" columns when the table carries a threshold.
void save_view_weights_csv(const ViewWeightTable& table, const std::filesystem::path& path);

/// For each removed column, the largest |Pearson r| against any surviving
/// column. A zero-variance column correlates 0 with everything.
std::vector<double> dimension_correlation(const EmbeddingMatrix& emb, const std::vector<Index>& removed);

/// Plain Pearson correlation of two equally long vectors (0 if either is constant).
double pearson(const Eigen::Ref<const Vector<double>>& a, const Eigen::Ref<const Vector<double>>& b);

struct PruningReport {
  double threshold = 0;
  std::vector<Index> removed;
  std::vector<Index> kept;
  EvalReport before;
  EvalReport after;
  double micro_f1_delta = 0;  // after - before
  std::vector<double> removed_max_correlation;
};

/// Evaluates the embedding before and after pruning at `threshold` with the
/// same evaluation seed, and correlates each removed dimension against the
/// survivors.
template <typename Scalar>
PruningReport pruning_report(const FactorModel<Scalar>& model, const EmbeddingMatrix& emb, const LabelSet& labels,
                             double threshold, const EvalConfig& eval_config) {
  auto pruned = prune_dimensions(emb, model, threshold);
  PruningReport report;
  report.threshold = threshold;
  report.removed = pruned.removed;
  report.kept = pruned.kept;
  report.before = evaluate(emb, labels, eval_config);
  report.after = pruned.removed.empty() ? report.before : evaluate(pruned.embedding, labels, eval_config);
  report.micro_f1_delta = report.after.micro_f1_mean - report.before.micro_f1_mean;
  if (!pruned.removed.empty() && pruned.kept.size() >= 2 && emb.num_nodes() >= 3)
    report.removed_max_correlation = dimension_correlation(emb, pruned.removed);
  return report;
}

nlohmann::json to_json(const PruningReport& report);

}  // namespace tpine
