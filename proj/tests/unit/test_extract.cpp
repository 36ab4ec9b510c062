#include "pfqr/error.hpp"
#include "pfqr/extract.hpp"
#include "pfqr/simgen.hpp"
#include "unit/test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace pfqr {
namespace {

using testing::random_matrix;
using testing::random_vector;

// z_i(t_j) = u_i * c_j with c free of zeros, y = u.
FunctionalSample rank_one_sample(Index n, Index m, std::uint64_t seed) {
  const Grid grid = Grid::uniform(m);
  const VectorXd u = random_vector(n, seed);
  VectorXd c(m);
  for (Index j = 0; j < m; ++j) c(j) = std::cos(3.0 * grid[j] + 0.4) + (j % 2 ? 0.3 : -0.2);
  return FunctionalSample(grid, u * c.transpose(), MatrixXd(), u);
}

FunctionalSample sim1_sample(Index n, std::uint64_t seed, Index m = 201) {
  Sim1Design d;
  d.n = n;
  d.m = m;
  d.seed = seed;
  return gen_sim1(d).sample;
}

ExtractionConfig config_for(BasisMethod method, Index k) {
  ExtractionConfig c;
  c.method = method;
  c.k_max = k;
  c.loss = method == BasisMethod::PCQR ? CheckLossSpec::composite_uniform(5) : CheckLossSpec::quantile(0.5);
  return c;
}

double l2_norm(const Grid& grid, const VectorXd& f) {
  return std::sqrt(inner_product(grid, f, f, InnerProduct::L2Weighted));
}

TEST(ExtractOne, RankOneDirectionHasConstantMagnitude) {
  const FunctionalSample s = rank_one_sample(40, 25, 1);
  const Standardized st = standardize_columns(s);
  const Direction d = extract_one(st.sample, CheckLossSpec::quantile(0.5));
  const double expected = 1.0 / std::sqrt(s.grid().spacing() * 25.0);
  const RowVectorXd c = s.curves().row(0) / s.responses()(0);
  for (Index j = 0; j < 25; ++j) {
    EXPECT_NEAR(std::abs(d.values(j)), expected, 1e-8);
    EXPECT_EQ(d.values(j) > 0, c(j) > 0) << j;
  }
}

TEST(ExtractOne, IndependentResponseGivesSmallRawNorm) {
  const FunctionalSample s = sim1_sample(2000, 3, 21);
  const FunctionalSample noise = s.with_responses(random_vector(2000, 99));
  const FunctionalSample signal = s.with_responses(s.curves().col(4));
  const CheckLossSpec ls = CheckLossSpec::least_squares();
  const double raw_noise = extract_one(standardize_columns(noise).sample, ls).raw_norm;
  const double raw_signal = extract_one(standardize_columns(signal).sample, ls).raw_norm;
  EXPECT_LT(raw_noise, 0.1);
  EXPECT_GT(raw_signal, 10.0 * raw_noise);
}

TEST(ExtractOne, ZeroResponseRaisesAllZeroDirection) {
  const FunctionalSample s = sim1_sample(30, 4, 21).with_responses(VectorXd::Zero(30));
  try {
    extract_one(standardize_columns(s).sample, CheckLossSpec::least_squares());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllZeroDirection);
  }
}

TEST(ExtractOne, PlsPeaksAtTheResponseColumn) {
  const FunctionalSample base = sim1_sample(300, 5, 51);
  const FunctionalSample s = base.with_responses(base.curves().col(0));
  const Direction d = extract_one(standardize_columns(s).sample, CheckLossSpec::least_squares());
  Index arg = 0;
  d.values.cwiseAbs().maxCoeff(&arg);
  EXPECT_EQ(arg, 0);
}

TEST(ExtractOne, ThreadedEqualsSequential) {
  const FunctionalSample s = sim1_sample(60, 6, 41);
  const FunctionalSample st = standardize_columns(s).sample;
  const Direction a = extract_one(st, CheckLossSpec::quantile(0.5), true, 1);
  const Direction b = extract_one(st, CheckLossSpec::quantile(0.5), true, 4);
  EXPECT_EQ(a.values, b.values);
}

TEST(Deflate, RankOneInScoreVanishes) {
  const VectorXd score = random_vector(12, 7);
  const MatrixXd curves = (score.array() + 2.0).matrix() * random_vector(6, 8).transpose();
  const Deflation d = deflate(FunctionalSample(Grid::uniform(6), curves), score);
  EXPECT_LT(d.residuals.curves().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Deflate, OrthogonalScoreOnlyCenters) {
  VectorXd score = random_vector(10, 9);
  score.array() -= score.mean();
  MatrixXd curves = random_matrix(10, 5, 10);
  for (Index j = 0; j < 5; ++j) {
    curves.col(j) -= score * (score.dot(curves.col(j)) / score.squaredNorm());
    curves.col(j).array() += 3.0;
  }
  const Deflation d = deflate(FunctionalSample(Grid::uniform(5), curves), score);
  const MatrixXd centered = curves.rowwise() - curves.colwise().mean();
  EXPECT_LT((d.residuals.curves() - centered).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(d.slopes.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Deflate, ResidualsOrthogonalToScore) {
  const VectorXd score = random_vector(10, 11);
  const Deflation d = deflate(FunctionalSample(Grid::uniform(5), random_matrix(10, 5, 12)), score);
  for (Index j = 0; j < 5; ++j) {
    EXPECT_LT(std::abs(d.residuals.curves().col(j).dot(score)), 1e-10);
    EXPECT_LT(std::abs(d.residuals.curves().col(j).sum()), 1e-10);
  }
}

TEST(Deflate, ConstantScoreRejected) {
  try {
    deflate(FunctionalSample(Grid::uniform(4), random_matrix(8, 4, 13)), VectorXd::Ones(8));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateScore);
  }
}

TEST(RunExtraction, ZeroComponents) {
  const ExtractionResult r = run_extraction(sim1_sample(20, 14, 21), config_for(BasisMethod::PQR, 0));
  EXPECT_EQ(r.size(), 0);
  EXPECT_EQ(r.scores.values.cols(), 0);
}

TEST(RunExtraction, RankOneExhaustsAfterOneStep) {
  const ExtractionResult r = run_extraction(rank_one_sample(30, 15, 15), config_for(BasisMethod::PQR, 3));
  EXPECT_EQ(r.size(), 1);
  EXPECT_TRUE(r.exhausted);
}

class SequentialMethods : public ::testing::TestWithParam<BasisMethod> {};

TEST_P(SequentialMethods, UnitDirectionsAndOrthogonalScores) {
  const FunctionalSample s = sim1_sample(80, 16, 41);
  for (ColumnScaling scaling : {ColumnScaling::Standardize, ColumnScaling::CenterOnly}) {
    ExtractionConfig c = config_for(GetParam(), 4);
    c.scaling = scaling;
    const ExtractionResult r = run_extraction(s, c);
    ASSERT_EQ(r.size(), 4);
    EXPECT_LT(r.directions.max_norm_error(), 1e-10);
    const MatrixXd gram = r.scores.values.transpose() * r.scores.values;
    for (Index a = 0; a < 4; ++a) {
      for (Index b = a + 1; b < 4; ++b) EXPECT_LT(std::abs(gram(a, b)), 1e-6 * 80) << a << "," << b;
    }
  }
}

TEST_P(SequentialMethods, ReplayAndLinearScoresReproduceTraining) {
  const FunctionalSample s = sim1_sample(60, 17, 41);
  const ExtractionResult r = run_extraction(s, config_for(GetParam(), 3));
  EXPECT_LT((r.replay_scores(s.curves()) - r.scores.values).cwiseAbs().maxCoeff(), 1e-9);
  const MatrixXd fresh = sim1_sample(25, 18, 41).curves();
  EXPECT_LT((r.replay_scores(fresh) - r.linear_scores(fresh)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST_P(SequentialMethods, TruncationEqualsShorterRun) {
  const FunctionalSample s = sim1_sample(50, 19, 31);
  const ExtractionResult full = run_extraction(s, config_for(GetParam(), 3));
  const ExtractionResult two = run_extraction(s, config_for(GetParam(), 2));
  const ExtractionResult cut = full.truncated(2);
  EXPECT_EQ(cut.directions.functions, two.directions.functions);
  EXPECT_EQ(cut.scores.values, two.scores.values);
  EXPECT_LT((cut.weights - two.weights).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(SequentialMethods, DoublingResponseKeepsDirections) {
  const FunctionalSample s = sim1_sample(60, 20, 31);
  const ExtractionResult a = run_extraction(s, config_for(GetParam(), 2));
  const ExtractionResult b = run_extraction(s.with_responses(2.0 * s.responses()), config_for(GetParam(), 2));
  for (Index k = 0; k < 2; ++k) {
    const double cosine = a.directions.functions.row(k).dot(b.directions.functions.row(k)) /
                          (a.directions.functions.row(k).norm() * b.directions.functions.row(k).norm());
    EXPECT_NEAR(std::abs(cosine), 1.0, 1e-8);
  }
}

INSTANTIATE_TEST_SUITE_P(Methods, SequentialMethods,
                         ::testing::Values(BasisMethod::PLS, BasisMethod::PQR, BasisMethod::PCQR),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(RunExtraction, PlsRecoversSingleDirection) {
  const FunctionalSample base = sim1_sample(500, 21);
  const Grid& grid = base.grid();
  VectorXd phi1(grid.size());
  for (Index j = 0; j < grid.size(); ++j) phi1(j) = std::sqrt(2.0) * std::cos(M_PI * grid[j]);
  const VectorXd y = grid.spacing() * (base.curves() * phi1);
  ExtractionConfig c = config_for(BasisMethod::PLS, 1);
  c.scaling = ColumnScaling::CenterOnly;
  const ExtractionResult r = run_extraction(base.with_responses(y), c);
  const VectorXd b = r.directions.functions.row(0).transpose();
  EXPECT_GT(std::abs(b.dot(phi1)) / (b.norm() * phi1.norm()), 0.99);
}

TEST(RunExtraction, FpcMatchesBasis) {
  const FunctionalSample s = sim1_sample(40, 22, 31);
  const ExtractionResult r = run_extraction(s, config_for(BasisMethod::FPC, 3));
  const FpcResult f = fpc_basis(s, 3);
  EXPECT_LT((r.directions.functions - f.basis.functions).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r.replay_scores(s.curves()) - r.scores.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ExtractionConfig, Validation) {
  ExtractionConfig c = config_for(BasisMethod::PQR, 3);
  c.stop_rule = StopRule::CrossValidation;
  c.cv_folds = 1;
  EXPECT_THROW(c.validate(50, 20), Error);
  c.cv_folds = 5;
  EXPECT_NO_THROW(c.validate(50, 20));
  c.k_max = 50;
  EXPECT_THROW(c.validate(50, 20), Error);
  c = config_for(BasisMethod::PQR, 2);
  c.loss = CheckLossSpec::least_squares();
  EXPECT_THROW(c.validate(50, 20), Error);
}

TEST(SelectK, CrossValidationFindsTwoComponents) {
  const Grid grid = Grid::uniform(30);
  VectorXd p1(30), p2(30);
  for (Index j = 0; j < 30; ++j) {
    p1(j) = std::cos(M_PI * grid[j]);
    p2(j) = std::sin(2.0 * M_PI * grid[j]) + 0.5;
  }
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const MatrixXd u = random_matrix(60, 2, 1000 + seed);
    const MatrixXd curves = u.col(0) * p1.transpose() + u.col(1) * p2.transpose();
    const VectorXd y = u.col(0) - 2.0 * u.col(1) + 1e-3 * random_vector(60, 2000 + seed);
    ExtractionConfig c = config_for(BasisMethod::PLS, 4);
    c.loss = CheckLossSpec::least_squares();
    c.stop_rule = StopRule::CrossValidation;
    c.seed = seed;
    hits += select_k(FunctionalSample(grid, curves, MatrixXd(), y), c) == 2;
  }
  EXPECT_GE(hits, 45);
}

TEST(SelectK, PureNoisePrefersOneComponent) {
  int small = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const FunctionalSample s = sim1_sample(60, 3000 + seed, 21).with_responses(random_vector(60, 4000 + seed));
    ExtractionConfig c = config_for(BasisMethod::PLS, 3);
    c.loss = CheckLossSpec::least_squares();
    c.stop_rule = StopRule::CrossValidation;
    c.seed = seed;
    small += select_k(s, c) <= 1;
  }
  EXPECT_GT(small, 10);
}

TEST(SelectK, BicOnTwoComponentData) {
  const Grid grid = Grid::uniform(20);
  MatrixXd curves(80, 20);
  const MatrixXd u = random_matrix(80, 2, 77);
  for (Index j = 0; j < 20; ++j) curves.col(j) = u.col(0) * std::cos(M_PI * grid[j]) + u.col(1) * grid[j];
  const VectorXd y = u.col(0) + u.col(1) + 1e-3 * random_vector(80, 78);
  ExtractionConfig c = config_for(BasisMethod::PQR, 3);
  c.stop_rule = StopRule::BIC;
  EXPECT_EQ(select_k(FunctionalSample(grid, curves, MatrixXd(), y), c), 2);
}

TEST(SelectK, Deterministic) {
  const FunctionalSample s = sim1_sample(40, 23, 21);
  ExtractionConfig c = config_for(BasisMethod::PQR, 3);
  c.stop_rule = StopRule::CrossValidation;
  c.seed = 5;
  EXPECT_EQ(select_k(s, c), select_k(s, c));
}

}  // namespace
}  // namespace pfqr
