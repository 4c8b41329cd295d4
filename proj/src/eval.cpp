#include "tpine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "tpine/random.hpp"

namespace tpine {

namespace {

double softplus(double m) { return std::max(m, 0.0) + std::log1p(std::exp(-std::abs(m))); }

double logistic(double m) {
  if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
  const double e = std::exp(m);
  return e / (1.0 + e);
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// Sample standard deviation; 0 for a single value.
double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / (v.size() - 1));
}

bool contains(const std::vector<Index>& sorted, Index x) { return std::binary_search(sorted.begin(), sorted.end(), x); }

double f1(Index tp, Index fp, Index fn) {
  const Index denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * tp / denom;
}

}  // namespace

double LogisticProblem::objective(const Vector<double>& params) const {
  const Index d = x->cols();
  const auto w = params.head(d);
  const Vector<double> z = (*x * w).array() + params(d);
  double loss = 0;
  for (Index i = 0; i < z.size(); ++i) loss += softplus(-y(i) * z(i));
  return 0.5 * w.squaredNorm() + inverse_l2 * loss;
}

Vector<double> LogisticProblem::gradient(const Vector<double>& params) const {
  const Index d = x->cols();
  const auto w = params.head(d);
  const Vector<double> z = (*x * w).array() + params(d);
  Vector<double> r(z.size());
  for (Index i = 0; i < z.size(); ++i) r(i) = -y(i) * logistic(-y(i) * z(i));
  Vector<double> g(d + 1);
  g.head(d) = w + inverse_l2 * (x->transpose() * r);
  g(d) = inverse_l2 * r.sum();
  return g;
}

Vector<double> minimize_logistic(const LogisticProblem& problem, const TrainOptions& options, int* iterations) {
  const Matrix<double>& x = *problem.x;
  const Index n = x.rows(), d = x.cols();
  Vector<double> params = Vector<double>::Zero(d + 1);
  Vector<double> grad = problem.gradient(params);
  double value = problem.objective(params);
  int it = 0;
  for (; it < options.max_iters && grad.norm() > options.grad_tol; ++it) {
    const Vector<double> z = (x * params.head(d)).array() + params(d);
    Vector<double> curvature(n);
    for (Index i = 0; i < n; ++i) {
      const double p = logistic(z(i));
      curvature(i) = problem.inverse_l2 * p * (1 - p);
    }
    Matrix<double> hessian(d + 1, d + 1);
    hessian.topLeftCorner(d, d) = x.transpose() * curvature.asDiagonal() * x;
    hessian.topLeftCorner(d, d).diagonal().array() += 1.0;
    hessian.block(0, d, d, 1) = x.transpose() * curvature;
    hessian.block(d, 0, 1, d) = hessian.block(0, d, d, 1).transpose();
    hessian(d, d) = curvature.sum() + 1e-12;
    const Vector<double> step = hessian.ldlt().solve(-grad);

    // Armijo backtracking. Near the optimum the objective stops resolving the
    // decrease, so a step that shrinks the gradient is also accepted.
    const double slope = grad.dot(step);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      const Vector<double> trial = params + t * step;
      const double trial_value = problem.objective(trial);
      const Vector<double> trial_grad = problem.gradient(trial);
      if (trial_value <= value + 1e-4 * t * slope || trial_grad.norm() < grad.norm()) {
        params = trial;
        value = trial_value;
        grad = trial_grad;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (iterations) *iterations = it;
  return params;
}

Vector<double> OvrClassifier::scores(const Eigen::Ref<const RowVector<double>>& x) const {
  Vector<double> s(num_labels);
  for (Index l = 0; l < num_labels; ++l) {
    switch (status[l]) {
      case Status::NoPositives: s(l) = 0.0; break;
      case Status::NoNegatives: s(l) = 1.0; break;
      case Status::Fitted: s(l) = logistic(weights.row(l).dot(x) + bias(l)); break;
    }
  }
  return s;
}

OvrClassifier train_ovr(const EmbeddingMatrix& emb, const LabelSet& labels, const std::vector<Index>& train_idx,
                        const TrainOptions& options) {
  if (train_idx.empty()) throw std::invalid_argument("train_ovr: empty training set");
  if (labels.num_nodes != emb.num_nodes())
    throw std::invalid_argument("train_ovr: label set covers " + std::to_string(labels.num_nodes) +
                                " nodes, embedding has " + std::to_string(emb.num_nodes()));
  for (Index v : train_idx)
    if (v < 0 || v >= emb.num_nodes() || !labels.is_labeled(v))
      throw std::invalid_argument("train_ovr: training node " + std::to_string(v) + " is missing or unlabeled");

  const Matrix<double> x = emb.matrix()(train_idx, Eigen::all);
  OvrClassifier clf;
  clf.num_labels = labels.num_labels;
  clf.inverse_l2 = options.inverse_l2;
  clf.weights = Matrix<double>::Zero(labels.num_labels, emb.dim());
  clf.bias = Vector<double>::Zero(labels.num_labels);
  clf.status.assign(labels.num_labels, OvrClassifier::Status::Fitted);
  clf.iterations.assign(labels.num_labels, 0);

  LogisticProblem problem{&x, Vector<double>(x.rows()), options.inverse_l2};
  for (Index l = 0; l < labels.num_labels; ++l) {
    Index positives = 0;
    for (std::size_t i = 0; i < train_idx.size(); ++i) {
      const bool pos = contains(labels.assignments[train_idx[i]], l);
      problem.y(static_cast<Index>(i)) = pos ? 1.0 : -1.0;
      positives += pos;
    }
    if (positives == 0) {
      clf.status[l] = OvrClassifier::Status::NoPositives;
      continue;
    }
    if (positives == static_cast<Index>(train_idx.size())) {
      clf.status[l] = OvrClassifier::Status::NoNegatives;
      continue;
    }
    const Vector<double> params = minimize_logistic(problem, options, &clf.iterations[l]);
    clf.weights.row(l) = params.head(emb.dim()).transpose();
    clf.bias(l) = params(emb.dim());
  }
  return clf;
}

std::vector<Index> predict_from_scores(const Vector<double>& scores, PredictMode mode, Index k) {
  if (mode == PredictMode::SingleLabel) k = 1;
  std::vector<Index> order(scores.size());
  std::iota(order.begin(), order.end(), Index{0});
  const auto take = static_cast<std::size_t>(std::clamp<Index>(k, 0, scores.size()));
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](Index a, Index b) { return scores(a) > scores(b) || (scores(a) == scores(b) && a < b); });
  order.resize(take);
  return order;
}

std::vector<Index> predict(const OvrClassifier& clf, const EmbeddingMatrix& emb, Index node, PredictMode mode,
                           Index k) {
  return predict_from_scores(clf.scores(emb.row(node)), mode, k);
}

std::vector<ConfusionCounts> confusion_counts(const LabelSets& predicted, const LabelSets& truth, Index num_labels) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("prediction and truth cover different node counts");
  if (truth.empty()) throw std::invalid_argument("empty evaluation set");
  std::vector<ConfusionCounts> counts(num_labels);
  for (std::size_t v = 0; v < truth.size(); ++v) {
    auto pred = predicted[v], gold = truth[v];
    std::sort(pred.begin(), pred.end());
    std::sort(gold.begin(), gold.end());
    for (Index l : pred) {
      if (l < 0 || l >= num_labels) throw std::invalid_argument("label id out of range");
      (contains(gold, l) ? counts[l].tp : counts[l].fp) += 1;
    }
    for (Index l : gold) {
      if (l < 0 || l >= num_labels) throw std::invalid_argument("label id out of range");
      if (!contains(pred, l)) counts[l].fn += 1;
    }
  }
  return counts;
}

double micro_f1(const LabelSets& predicted, const LabelSets& truth, Index num_labels) {
  ConfusionCounts total;
  for (const auto& c : confusion_counts(predicted, truth, num_labels)) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return f1(total.tp, total.fp, total.fn);
}

double macro_f1(const LabelSets& predicted, const LabelSets& truth, Index num_labels) {
  if (num_labels < 1) throw std::invalid_argument("macro_f1 needs at least one label");
  double sum = 0;
  for (const auto& c : confusion_counts(predicted, truth, num_labels)) sum += f1(c.tp, c.fp, c.fn);
  return sum / num_labels;
}

std::pair<std::vector<Index>, std::vector<Index>> stratified_split(const LabelSet& labels, double train_fraction,
                                                                   std::uint64_t seed, std::uint64_t repeat) {
  if (!(train_fraction > 0 && train_fraction < 1)) throw std::invalid_argument("train fraction must be in (0, 1)");
  std::map<Index, std::vector<Index>> strata;
  for (Index v = 0; v < labels.num_nodes; ++v)
    if (labels.is_labeled(v)) strata[labels.assignments[v].front()].push_back(v);

  Rng rng(seed, {repeat});
  std::vector<Index> train, test;
  for (auto& [label, nodes] : strata) {
    rng.shuffle(nodes);
    const auto n = static_cast<Index>(nodes.size());
    Index n_train = static_cast<Index>(std::floor(train_fraction * n + 0.5));
    if (n >= 2) n_train = std::clamp<Index>(n_train, 1, n - 1);
    train.insert(train.end(), nodes.begin(), nodes.begin() + n_train);
    test.insert(test.end(), nodes.begin() + n_train, nodes.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

EvalReport evaluate(const EmbeddingMatrix& emb, const LabelSet& labels, const EvalConfig& config) {
  if (config.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (labels.num_nodes != emb.num_nodes())
    throw std::invalid_argument("label set covers " + std::to_string(labels.num_nodes) + " nodes, embedding has " +
                                std::to_string(emb.num_nodes()));
  EvalReport report;
  report.train_fraction = config.train_fraction;
  report.repeats = config.repeats;
  report.seed = config.seed;
  for (Index r = 0; r < config.repeats; ++r) {
    auto [train, test] = stratified_split(labels, config.train_fraction, config.seed, static_cast<std::uint64_t>(r));
    if (train.empty() || test.empty())
      throw std::invalid_argument("train fraction " + std::to_string(config.train_fraction) +
                                  " leaves an empty train or test set");
    const auto clf = train_ovr(emb, labels, train, config.train);
    for (Index l = 0; l < clf.num_labels; ++l)
      if (clf.status[l] == OvrClassifier::Status::NoPositives)
        report.warnings.push_back("repeat " + std::to_string(r) + ": label " + std::to_string(l) +
                                  " has no positive training examples");
    LabelSets predicted, truth;
    for (Index v : test) {
      truth.push_back(labels.assignments[v]);
      predicted.push_back(predict(clf, emb, v, PredictMode::MultiLabelTopK, static_cast<Index>(truth.back().size())));
    }
    report.micro_f1_per_repeat.push_back(micro_f1(predicted, truth, labels.num_labels));
    report.macro_f1_per_repeat.push_back(macro_f1(predicted, truth, labels.num_labels));
  }
  report.micro_f1_mean = mean(report.micro_f1_per_repeat);
  report.micro_f1_std = stddev(report.micro_f1_per_repeat);
  report.macro_f1_mean = mean(report.macro_f1_per_repeat);
  report.macro_f1_std = stddev(report.macro_f1_per_repeat);
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"train_fraction", r.train_fraction},
          {"repeats", r.repeats},
          {"seed", r.seed},
          {"micro_f1_mean", r.micro_f1_mean},
          {"micro_f1_std", r.micro_f1_std},
          {"macro_f1_mean", r.macro_f1_mean},
          {"macro_f1_std", r.macro_f1_std},
          {"micro_f1_per_repeat", r.micro_f1_per_repeat},
          {"macro_f1_per_repeat", r.macro_f1_per_repeat},
          {"warnings", r.warnings}};
}

}  // namespace tpine
