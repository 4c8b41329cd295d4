#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "tpine/data.hpp"

namespace tpine {

using LabelSets = std::vector<std::vector<Index>>;

struct TrainOptions {
  double inverse_l2 = 1.0;  // C in 0.5|w|^2 + C * sum(logloss); bias is not penalized
  double grad_tol = 1e-6;
  int max_iters = 1000;
};

/// One binary L2-regularized logistic regression per label.
struct OvrClassifier {
  enum class Status { Fitted, NoPositives, NoNegatives };

  Index num_labels = 0;
  Matrix<double> weights;  // num_labels x dim
  Vector<double> bias;
  std::vector<Status> status;
  std::vector<int> iterations;
  double inverse_l2 = 1.0;

  /// Per-label positive-class probabilities for one embedding row.
  /// NoPositives labels score 0, NoNegatives labels score 1.
  Vector<double> scores(const Eigen::Ref<const RowVector<double>>& x) const;
};

/// Regularized logistic objective and gradient for one binary problem,
/// exposed so tests can check the optimizer against an independent solver.
struct LogisticProblem {
  const Matrix<double>* x = nullptr;  // n x d
  Vector<double> y;                   // +1 / -1
  double inverse_l2 = 1.0;

  /// Parameters are packed as [w; b].
  double objective(const Vector<double>& params) const;
  Vector<double> gradient(const Vector<double>& params) const;
};

/// Newton's method with backtracking line search on the strictly convex
/// objective; stops when |grad| <= grad_tol or after max_iters steps.
Vector<double> minimize_logistic(const LogisticProblem& problem, const TrainOptions& options,
                                 int* iterations = nullptr);

OvrClassifier train_ovr(const EmbeddingMatrix& emb, const LabelSet& labels, const std::vector<Index>& train_idx,
                        const TrainOptions& options = {});

enum class PredictMode { SingleLabel, MultiLabelTopK };

/// SingleLabel: argmax (ties to the lower label id). MultiLabelTopK: the
/// `k` best labels, ordered by score then id.
std::vector<Index> predict_from_scores(const Vector<double>& scores, PredictMode mode, Index k = 1);

std::vector<Index> predict(const OvrClassifier& clf, const EmbeddingMatrix& emb, Index node, PredictMode mode,
                           Index k = 1);

struct ConfusionCounts {
  Index tp = 0, fp = 0, fn = 0;
};

/// Per-label TP/FP/FN over paired prediction/truth sets.
std::vector<ConfusionCounts> confusion_counts(const LabelSets& predicted, const LabelSets& truth, Index num_labels);

double micro_f1(const LabelSets& predicted, const LabelSets& truth, Index num_labels);
/// Unweighted mean over all `num_labels` labels; a label with no true and no
/// predicted instance contributes 0.
double macro_f1(const LabelSets& predicted, const LabelSets& truth, Index num_labels);

struct EvalConfig {
  double train_fraction = 0.5;
  Index repeats = 10;
  std::uint64_t seed = 0;
  TrainOptions train;
};

struct EvalReport {
  double train_fraction = 0;
  Index repeats = 0;
  std::uint64_t seed = 0;
  double micro_f1_mean = 0, micro_f1_std = 0;
  double macro_f1_mean = 0, macro_f1_std = 0;
  std::vector<double> micro_f1_per_repeat;
  std::vector<double> macro_f1_per_repeat;
  std::vector<std::string> warnings;
};

/// Stratified train/test split of the labeled nodes; strata are keyed by each
/// node's smallest label id. Returns (train, test), each sorted.
std::pair<std::vector<Index>, std::vector<Index>> stratified_split(const LabelSet& labels, double train_fraction,
                                                                   std::uint64_t seed, std::uint64_t repeat);

/// Repeated stratified random splits: train on the split, predict the held-out
/// nodes with the known-label-count top-k rule, score micro/macro F1.
EvalReport evaluate(const EmbeddingMatrix& emb, const LabelSet& labels, const EvalConfig& config);

nlohmann::json to_json(const EvalReport& report);

}  // namespace tpine
