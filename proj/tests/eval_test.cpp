#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "tpine/eval.hpp"

using namespace tpine;

namespace {

LabelSet single_labels(const std::vector<Index>& cls, Index num_labels) {
  LabelSet l{static_cast<Index>(cls.size()), num_labels, {}};
  for (Index c : cls) l.assignments.push_back({c});
  return l;
}

std::vector<Index> iota(Index n) {
  std::vector<Index> v(n);
  for (Index i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(TrainOvr, SeparableToyIsPerfect) {
  Eigen::MatrixXd x(6, 2);
  x << 1, 0, 1, 0, 1, 0, -1, 0, -1, 0, -1, 0;
  const EmbeddingMatrix emb(x);
  const auto labels = single_labels({0, 0, 0, 1, 1, 1}, 2);
  const auto clf = train_ovr(emb, labels, iota(6));
  for (Index v = 0; v < 6; ++v)
    EXPECT_EQ(predict(clf, emb, v, PredictMode::SingleLabel), labels.assignments[v]) << "node " << v;
}

TEST(TrainOvr, IdenticalEmbeddingsCollapseToPrior) {
  const EmbeddingMatrix emb(Eigen::MatrixXd::Ones(10, 3));
  const auto labels = single_labels({0, 0, 0, 1, 1, 1, 1, 1, 1, 1}, 2);
  const auto clf = train_ovr(emb, labels, iota(10));
  const auto s = clf.scores(emb.row(0));
  EXPECT_NEAR(s(0), 0.3, 1e-6);
  EXPECT_NEAR(s(1), 0.7, 1e-6);

  // With no usable signal the regularized optimum spends nothing on w, and
  // the data term reaches n * H(p), the label-frequency entropy.
  const Eigen::MatrixXd x = emb.matrix();
  LogisticProblem problem{&x, Eigen::VectorXd(10), 1.0};
  for (Index v = 0; v < 10; ++v) problem.y(v) = labels.assignments[v][0] == 1 ? 1.0 : -1.0;
  Eigen::VectorXd params(4);
  params << clf.weights.row(1).transpose(), clf.bias(1);
  const double entropy = -(0.3 * std::log(0.3) + 0.7 * std::log(0.7));
  EXPECT_NEAR(problem.objective(params), 10 * entropy, 1e-9);
  EXPECT_LE(clf.weights.norm(), 1e-6);
}

TEST(TrainOvr, NewtonAgreesWithGradientDescentOracle) {
  Rng rng(1);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd x = synth::uniform_matrix(rng, 25, 3, -2, 2);
    Eigen::VectorXd y(25);
    for (Index i = 0; i < 25; ++i) y(i) = (x(i, 0) - 0.5 * x(i, 1) + 0.8 * (rng.uniform() - 0.5) > 0) ? 1.0 : -1.0;
    LogisticProblem problem{&x, y, 1.0};
    const auto newton = minimize_logistic(problem, {});
    const auto gd = oracle::logistic_gd(x, y, 1.0, 2000000, 1e-10);
    EXPECT_LE((newton - gd).cwiseAbs().maxCoeff(), 1e-4) << "trial " << trial;
    EXPECT_LE(problem.gradient(newton).norm(), 1e-6);
  }
}

TEST(TrainOvr, GradientMatchesFiniteDifferences) {
  Rng rng(2);
  const Eigen::MatrixXd x = synth::uniform_matrix(rng, 12, 3, -1, 1);
  Eigen::VectorXd y(12);
  for (Index i = 0; i < 12; ++i) y(i) = rng.uniform() < 0.5 ? 1.0 : -1.0;
  LogisticProblem problem{&x, y, 2.5};
  const Eigen::VectorXd p = synth::uniform_matrix(rng, 4, 1, -1, 1);
  const auto g = problem.gradient(p);
  for (Index k = 0; k < 4; ++k) {
    Eigen::VectorXd hi = p, lo = p;
    hi(k) += 1e-6;
    lo(k) -= 1e-6;
    EXPECT_NEAR(g(k), (problem.objective(hi) - problem.objective(lo)) / 2e-6, 1e-6);
  }
}

TEST(TrainOvr, NeverWorseThanZeroModel) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd x = synth::uniform_matrix(rng, 30, 4, -3, 3);
    Eigen::VectorXd y(30);
    for (Index i = 0; i < 30; ++i) y(i) = rng.uniform() < 0.3 ? 1.0 : -1.0;
    LogisticProblem problem{&x, y, 1.0};
    EXPECT_LE(problem.objective(minimize_logistic(problem, {})), problem.objective(Eigen::VectorXd::Zero(5)));
  }
}

TEST(TrainOvr, LabelWithoutPositivesPredictsNegative) {
  Rng rng(4);
  const EmbeddingMatrix emb(synth::uniform_matrix(rng, 6, 2));
  const auto labels = single_labels({0, 0, 1, 1, 0, 2}, 3);
  const auto clf = train_ovr(emb, labels, {0, 1, 2, 3});
  EXPECT_EQ(clf.status[2], OvrClassifier::Status::NoPositives);
  for (Index v = 0; v < 6; ++v) EXPECT_EQ(clf.scores(emb.row(v))(2), 0.0);
}

TEST(TrainOvr, RejectsBadTrainSets) {
  const EmbeddingMatrix emb(Eigen::MatrixXd::Ones(3, 2));
  LabelSet labels{3, 2, {{0}, {}, {1}}};
  EXPECT_THROW(train_ovr(emb, labels, {}), std::invalid_argument);
  EXPECT_THROW(train_ovr(emb, labels, {0, 1}), std::invalid_argument);
  EXPECT_THROW(train_ovr(emb, labels, {0, 5}), std::invalid_argument);
}

TEST(Predict, SingleLabelArgmax) {
  Eigen::VectorXd s(3);
  s << 0.1, 0.9, 0.4;
  EXPECT_EQ(predict_from_scores(s, PredictMode::SingleLabel), (std::vector<Index>{1}));
}

TEST(Predict, TiesGoToLowestLabel) {
  Eigen::VectorXd s(2);
  s << 0.5, 0.5;
  EXPECT_EQ(predict_from_scores(s, PredictMode::SingleLabel), (std::vector<Index>{0}));
}

TEST(Predict, TopKReturnsTrueLabelCount) {
  Eigen::VectorXd s(4);
  s << 0.2, 0.7, 0.1, 0.7;
  const auto p = predict_from_scores(s, PredictMode::MultiLabelTopK, 2);
  EXPECT_EQ(p, (std::vector<Index>{1, 3}));
  EXPECT_EQ(predict_from_scores(s, PredictMode::MultiLabelTopK, 3).size(), 3u);
}

TEST(F1, PerfectPredictions) {
  const LabelSets truth{{0}, {1, 2}, {2}};
  EXPECT_EQ(micro_f1(truth, truth, 3), 1.0);
  EXPECT_EQ(macro_f1(truth, truth, 3), 1.0);
}

TEST(F1, AllWrong) {
  const LabelSets truth{{0}, {1}}, pred{{1}, {0}};
  EXPECT_EQ(micro_f1(pred, truth, 2), 0.0);
  EXPECT_EQ(macro_f1(pred, truth, 2), 0.0);
}

TEST(F1, PooledCountsToy) {
  // Per-label (TP, FP, FN) = (2,1,1), (1,0,2), (0,1,0).
  const LabelSets truth{{0}, {0}, {0, 1}, {1}, {1}, {}};
  const LabelSets pred{{0}, {0}, {1, 2}, {}, {}, {0}};
  const auto c = confusion_counts(pred, truth, 3);
  EXPECT_EQ(c[0].tp, 2);
  EXPECT_EQ(c[0].fp, 1);
  EXPECT_EQ(c[0].fn, 1);
  EXPECT_EQ(c[1].tp, 1);
  EXPECT_EQ(c[1].fp, 0);
  EXPECT_EQ(c[1].fn, 2);
  EXPECT_EQ(c[2].tp, 0);
  EXPECT_EQ(c[2].fp, 1);
  EXPECT_EQ(c[2].fn, 0);
  EXPECT_DOUBLE_EQ(micro_f1(pred, truth, 3), 2.0 * 3 / (2.0 * 3 + 2 + 3));
  EXPECT_DOUBLE_EQ(macro_f1(pred, truth, 3), (4.0 / 6 + 2.0 / 4 + 0.0) / 3);
}

TEST(F1, AbsentLabelsCountAsZeroInMacro) {
  const LabelSets truth{{0}, {0}};
  EXPECT_DOUBLE_EQ(macro_f1(truth, truth, 4), 0.25);
  EXPECT_EQ(micro_f1(truth, truth, 4), 1.0);
}

TEST(F1, EmptyOrMismatchedIsError) {
  EXPECT_THROW(micro_f1({}, {}, 2), std::invalid_argument);
  EXPECT_THROW(macro_f1({{0}}, {{0}, {1}}, 2), std::invalid_argument);
  EXPECT_THROW(micro_f1({{3}}, {{0}}, 2), std::invalid_argument);
}

TEST(F1, MatchesOracleAndPermutationInvariant) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + rng.below(20), L = 1 + rng.below(5);
    LabelSets truth(n), pred(n);
    for (Index v = 0; v < n; ++v)
      for (Index l = 0; l < L; ++l) {
        if (rng.uniform() < 0.35) truth[v].push_back(l);
        if (rng.uniform() < 0.35) pred[v].push_back(l);
      }
    EXPECT_DOUBLE_EQ(micro_f1(pred, truth, L), oracle::micro_f1(pred, truth, L));
    EXPECT_DOUBLE_EQ(macro_f1(pred, truth, L), oracle::macro_f1(pred, truth, L));
    std::vector<Index> perm = iota(n);
    rng.shuffle(perm);
    LabelSets tp, pp;
    for (Index v : perm) {
      tp.push_back(truth[v]);
      pp.push_back(pred[v]);
    }
    EXPECT_EQ(micro_f1(pp, tp, L), micro_f1(pred, truth, L));
    EXPECT_EQ(macro_f1(pp, tp, L), macro_f1(pred, truth, L));
  }
}

TEST(F1, SingleLabelMicroEqualsAccuracy) {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + rng.below(30), L = 2 + rng.below(4);
    LabelSets truth(n), pred(n);
    Index correct = 0;
    for (Index v = 0; v < n; ++v) {
      truth[v] = {static_cast<Index>(rng.below(L))};
      pred[v] = {static_cast<Index>(rng.below(L))};
      correct += truth[v] == pred[v];
    }
    EXPECT_NEAR(micro_f1(pred, truth, L), static_cast<double>(correct) / n, 1e-15);
  }
}

TEST(StratifiedSplit, FractionsPerStratumAndDeterminism) {
  std::vector<Index> cls;
  for (Index c = 0; c < 3; ++c)
    for (Index i = 0; i < 10 * (c + 1); ++i) cls.push_back(c);
  auto labels = single_labels(cls, 3);
  labels.assignments.push_back({});  // an unlabeled node joins neither side
  labels.num_nodes += 1;
  const auto [train, test] = stratified_split(labels, 0.3, 7, 0);
  EXPECT_EQ(train.size(), 3u + 6u + 9u);
  EXPECT_EQ(train.size() + test.size(), 60u);
  std::set<Index> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  EXPECT_EQ(all.size(), 60u);
  EXPECT_FALSE(all.count(60));
  EXPECT_EQ(stratified_split(labels, 0.3, 7, 0), stratified_split(labels, 0.3, 7, 0));
  EXPECT_NE(stratified_split(labels, 0.3, 7, 0).first, stratified_split(labels, 0.3, 7, 1).first);
  EXPECT_THROW(stratified_split(labels, 1.0, 7, 0), std::invalid_argument);
  EXPECT_THROW(stratified_split(labels, 0.0, 7, 0), std::invalid_argument);
}

TEST(StratifiedSplit, SmallStrataKeepBothSides) {
  // Strata of 2 and 3 nodes: each side keeps at least one node per stratum.
  const auto labels = single_labels({0, 0, 1, 1, 1}, 2);
  const auto low = stratified_split(labels, 0.01, 1, 0);
  EXPECT_EQ(low.first.size(), 2u);
  EXPECT_EQ(low.second.size(), 3u);
  const auto high = stratified_split(labels, 0.99, 1, 0);
  EXPECT_EQ(high.first.size(), 3u);
  EXPECT_EQ(high.second.size(), 2u);
}

TEST(Evaluate, DeterministicAndShaped) {
  Rng rng(7);
  std::vector<Index> cls;
  Eigen::MatrixXd x(40, 3);
  for (Index v = 0; v < 40; ++v) {
    cls.push_back(v % 3);
    x.row(v) = synth::uniform_matrix(rng, 1, 3, -1, 1);
    x(v, v % 3) += 1.0;
  }
  const EmbeddingMatrix emb(x);
  const auto labels = single_labels(cls, 3);
  EvalConfig cfg;
  cfg.repeats = 10;
  cfg.seed = 3;
  const auto a = evaluate(emb, labels, cfg);
  const auto b = evaluate(emb, labels, cfg);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(a.micro_f1_per_repeat.size(), 10u);
  EXPECT_EQ(a.macro_f1_per_repeat.size(), 10u);
  for (double s : a.micro_f1_per_repeat) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  EXPECT_GT(a.micro_f1_mean, 0.5);
  EXPECT_GE(a.micro_f1_std, 0.0);
}

TEST(Evaluate, OneHotPerClassIsPerfect) {
  std::vector<Index> cls;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(50, 5);
  for (Index v = 0; v < 50; ++v) {
    cls.push_back(v % 5);
    x(v, v % 5) = 1.0;
  }
  EvalConfig cfg;
  cfg.train_fraction = 0.9;
  const auto r = evaluate(EmbeddingMatrix(x), single_labels(cls, 5), cfg);
  EXPECT_EQ(r.micro_f1_mean, 1.0);
  EXPECT_EQ(r.macro_f1_mean, 1.0);
  EXPECT_EQ(r.micro_f1_std, 0.0);
}

TEST(Evaluate, MultiLabelUsesTrueLabelCount) {
  // Labels 0 and 1 are both encoded in the embedding; nodes carry one or both.
  Eigen::MatrixXd x(60, 2);
  LabelSet labels{60, 2, {}};
  for (Index v = 0; v < 60; ++v) {
    const bool a = v % 3 != 1, b = v % 3 != 0;
    x.row(v) << (a ? 1.0 : -1.0), (b ? 1.0 : -1.0);
    labels.assignments.push_back({});
    if (a) labels.assignments.back().push_back(0);
    if (b) labels.assignments.back().push_back(1);
  }
  EvalConfig cfg;
  cfg.repeats = 3;
  const auto r = evaluate(EmbeddingMatrix(x), labels, cfg);
  EXPECT_EQ(r.micro_f1_mean, 1.0);
}

TEST(Evaluate, RejectsBadConfig) {
  const EmbeddingMatrix emb(Eigen::MatrixXd::Ones(4, 2));
  const auto labels = single_labels({0, 1, 0, 1}, 2);
  EvalConfig cfg;
  cfg.repeats = 0;
  EXPECT_THROW(evaluate(emb, labels, cfg), std::invalid_argument);
  cfg.repeats = 1;
  cfg.train_fraction = 1.5;
  EXPECT_THROW(evaluate(emb, labels, cfg), std::invalid_argument);
  EXPECT_THROW(evaluate(EmbeddingMatrix(Eigen::MatrixXd::Ones(3, 2)), labels, EvalConfig{}), std::invalid_argument);
}

TEST(Evaluate, WarnsWhenAClassHasNoTrainingExample) {
  // Label 2 only ever co-occurs with a smaller label, so its stratum is 0/1 and
  // a small train fraction can leave it without positives.
  LabelSet labels{8, 3, {{0}, {0}, {0}, {0, 2}, {1}, {1}, {1}, {1}}};
  Eigen::MatrixXd x = Eigen::MatrixXd::Identity(8, 8);
  EvalConfig cfg;
  cfg.train_fraction = 0.25;
  cfg.repeats = 10;
  const auto r = evaluate(EmbeddingMatrix(x), labels, cfg);
  EXPECT_FALSE(r.warnings.empty());
}
