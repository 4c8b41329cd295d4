#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "tpine/cp_als.hpp"
#include "tpine/errors.hpp"
#include "tpine/interpret.hpp"

using namespace tpine;
namespace fs = std::filesystem;

namespace {

FactorModel<double> unit_model(Eigen::MatrixXd C, Index nodes = 6, std::uint64_t seed = 1) {
  Rng rng(seed);
  FactorModel<double> m;
  m.A = synth::uniform_matrix(rng, nodes, C.cols(), -1, 1);
  m.B = synth::uniform_matrix(rng, nodes, C.cols(), -1, 1);
  m.A.colwise().normalize();
  m.B.colwise().normalize();
  m.C = std::move(C);
  m.scales = Eigen::VectorXd::Ones(m.C.cols());
  return m;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(ViewWeights, IdentityCIsAbsC) {
  Eigen::MatrixXd C(2, 2);
  C << 1, 0, 0, -1;
  const auto t = view_weights(unit_model(C));
  EXPECT_EQ(t.num_views(), 2);
  EXPECT_EQ(t.num_dims(), 2);
  EXPECT_LE((t.weights - C.cwiseAbs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ViewWeights, ScaleAbsorptionInvariant) {
  Rng rng(2);
  auto m = unit_model(synth::uniform_matrix(rng, 2, 4, -1, 1));
  m.scales << 1.5, 0.5, 2.0, 3.0;
  auto moved = m;
  moved.A.col(1) *= 2.0;
  moved.scales(1) /= 2.0;
  moved.C.col(3) *= -4.0;
  moved.scales(3) /= 4.0;
  const auto a = view_weights(m).weights, b = view_weights(moved).weights;
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_GE(a.minCoeff(), 0.0);
}

TEST(ViewWeights, EmptySecondSliceGetsNoWeight) {
  Rng rng(3);
  auto dense = synth::random_tensor(rng, 10, 10, 2, 0.4, true);
  dense[1].setZero();
  const auto x = synth::to_sparse(dense);
  AlsConfig cfg;
  cfg.rank = 3;
  cfg.seed = 5;
  const auto t = view_weights(decompose(x, cfg));
  for (Index r = 0; r < t.num_dims(); ++r) EXPECT_LE(t.weights(1, r), 1e-6 * t.weights(0, r)) << "dim " << r;
}

TEST(ViewWeights, CsvLayout) {
  Eigen::MatrixXd C(2, 2);
  C << 0.5, 0.05, 0.25, 0.01;
  const auto path = fs::temp_directory_path() / "tpine_weights_test.csv";
  save_view_weights_csv(view_weights(unit_model(C), 0.12), path);
  EXPECT_EQ(read_file(path),
            "dimension,view_0,view_1,max_weight,kept\n"
            "0,0.5,0.25,0.5,1\n"
            "1,0.05,0.01,0.05,0\n");
  save_view_weights_csv(view_weights(unit_model(C)), path);
  EXPECT_EQ(read_file(path), "dimension,view_0,view_1\n0,0.5,0.25\n1,0.05,0.01\n");
  fs::remove(path);
}

TEST(DimensionCorrelation, DuplicateColumnIsOne) {
  Rng rng(4);
  Eigen::MatrixXd x = synth::uniform_matrix(rng, 20, 4, -1, 1);
  x.col(3) = x.col(1);
  const auto c = dimension_correlation(EmbeddingMatrix(x), {3});
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0], 1.0, 1e-12);
}

TEST(DimensionCorrelation, IndependentNoiseNearZero) {
  Rng rng(5);
  const Eigen::MatrixXd x = synth::uniform_matrix(rng, 20000, 3, -1, 1);
  const auto c = dimension_correlation(EmbeddingMatrix(x), {0});
  const double reference = std::max(std::abs(oracle::pearson(x.col(0), x.col(1))),
                                    std::abs(oracle::pearson(x.col(0), x.col(2))));
  EXPECT_NEAR(c[0], reference, 1e-12);
  EXPECT_LT(c[0], 0.05);
}

TEST(DimensionCorrelation, ConstantColumnIsZero) {
  Rng rng(6);
  Eigen::MatrixXd x = synth::uniform_matrix(rng, 10, 3, -1, 1);
  x.col(0).setConstant(0.7);
  EXPECT_EQ(dimension_correlation(EmbeddingMatrix(x), {0})[0], 0.0);
  EXPECT_EQ(pearson(x.col(0), x.col(1)), 0.0);
}

TEST(DimensionCorrelation, MatchesReferenceAndStaysInUnitInterval) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd x = synth::uniform_matrix(rng, 15, 5, -1, 1);
    x.col(2) += 0.8 * x.col(4);
    const auto c = dimension_correlation(EmbeddingMatrix(x), {2, 0});
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Index r = i == 0 ? 2 : 0;
      double expect = 0;
      for (Index k : {1, 3, 4}) expect = std::max(expect, std::abs(oracle::pearson(x.col(r), x.col(k))));
      EXPECT_NEAR(c[i], expect, 1e-12);
      EXPECT_GE(c[i], 0.0);
      EXPECT_LE(c[i], 1.0);
    }
  }
}

TEST(DimensionCorrelation, Preconditions) {
  const EmbeddingMatrix small(Eigen::MatrixXd::Ones(2, 3));
  EXPECT_THROW(dimension_correlation(small, {0}), std::invalid_argument);
  const EmbeddingMatrix narrow(Eigen::MatrixXd::Ones(5, 2));
  EXPECT_THROW(dimension_correlation(narrow, {0}), std::invalid_argument);
}

namespace {

struct Fixture {
  FactorModel<double> model;
  EmbeddingMatrix emb;
  LabelSet labels;
};

Fixture fitted_fixture() {
  auto data = synth::webkb_like(9);
  const auto x = stack_views(data.graph, build_knn_view(data.features, 10));
  AlsConfig cfg;
  cfg.rank = 12;
  cfg.seed = 2;
  Fixture f{decompose(x, cfg), {}, data.labels};
  f.emb = extract_embeddings(f.model);
  return f;
}

}  // namespace

TEST(PruningReport, ThresholdZeroChangesNothing) {
  const auto f = fitted_fixture();
  EvalConfig ec;
  ec.repeats = 3;
  const auto r = pruning_report(f.model, f.emb, f.labels, 0.0, ec);
  EXPECT_TRUE(r.removed.empty());
  EXPECT_EQ(r.before.micro_f1_per_repeat, r.after.micro_f1_per_repeat);
  EXPECT_EQ(r.micro_f1_delta, 0.0);
}

TEST(PruningReport, BeforeEqualsStandaloneEvaluate) {
  const auto f = fitted_fixture();
  EvalConfig ec;
  ec.repeats = 3;
  ec.seed = 17;
  const Eigen::RowVectorXd weights = view_weights(f.model).weights.colwise().maxCoeff();
  std::vector<double> sorted(weights.data(), weights.data() + weights.size());
  std::sort(sorted.begin(), sorted.end());
  const double threshold = 0.5 * (sorted[2] + sorted[3]);  // removes exactly three dimensions
  const auto r = pruning_report(f.model, f.emb, f.labels, threshold, ec);
  EXPECT_EQ(r.removed.size(), 3u);
  EXPECT_EQ(to_json(r.before).dump(), to_json(evaluate(f.emb, f.labels, ec)).dump());
  EXPECT_EQ(r.removed_max_correlation.size(), 3u);
  EXPECT_DOUBLE_EQ(r.micro_f1_delta, r.after.micro_f1_mean - r.before.micro_f1_mean);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("num_removed"), 3);
}

TEST(PruningReport, ThresholdAboveAllWeightsIsError) {
  const auto f = fitted_fixture();
  const double top = view_weights(f.model).weights.maxCoeff();
  EXPECT_THROW(pruning_report(f.model, f.emb, f.labels, top * 2, EvalConfig{}), NumericalError);
}
