#include "pfqr/error.hpp"
#include "pfqr/qsolve.hpp"
#include "unit/oracles.hpp"
#include "unit/test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace pfqr {
namespace {

using testing::random_matrix;
using testing::random_vector;
using testing::with_intercept;

TEST(CheckLoss, Values) {
  EXPECT_DOUBLE_EQ(check_loss(2.0, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(check_loss(-1.0, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(check_loss(0.0, 0.3), 0.0);
}

TEST(CheckLossSpec, ValidatesLevels) {
  EXPECT_THROW(CheckLossSpec::quantile(0.0), Error);
  EXPECT_THROW(CheckLossSpec::quantile(1.0), Error);
  EXPECT_THROW(CheckLossSpec::composite({0.5, 0.5}), Error);
  EXPECT_THROW(CheckLossSpec::composite({0.6, 0.4}), Error);
  const CheckLossSpec c = CheckLossSpec::composite_uniform(9);
  ASSERT_EQ(c.levels().size(), 9u);
  EXPECT_DOUBLE_EQ(c.levels()[0], 0.1);
  EXPECT_DOUBLE_EQ(c.tau(), 0.5);
}

TEST(FitQr, InterceptOnlyMedian) {
  VectorXd y(3);
  y << 1, 2, 3;
  const LinearFit f = fit_qr(MatrixXd::Ones(3, 1), y, 0.5);
  EXPECT_NEAR(f.slopes(0), 2.0, 1e-9);
  EXPECT_TRUE(f.diagnostics.converged);
}

TEST(FitQr, InterceptOnlyLowerQuartile) {
  VectorXd y(5);
  y << 0, 1, 2, 3, 4;
  EXPECT_NEAR(fit_qr(MatrixXd::Ones(5, 1), y, 0.25).slopes(0), 1.0, 1e-9);
}

TEST(FitQr, ExactLineAnyLevel) {
  const VectorXd x = VectorXd::LinSpaced(10, 1, 10);
  for (double tau : {0.1, 0.5, 0.9}) {
    const LinearFit f = fit_qr(with_intercept(x), 2.0 * x, tau);
    EXPECT_NEAR(f.slopes(0), 0.0, 1e-8);
    EXPECT_NEAR(f.slopes(1), 2.0, 1e-8);
    EXPECT_NEAR(f.objective, 0.0, 1e-8);
  }
}

TEST(FitQr, RankDeficientDesign) {
  MatrixXd d(5, 2);
  d.col(0).setOnes();
  d.col(1).setConstant(2.0);
  try {
    fit_qr(d, random_vector(5, 1), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficientDesign);
  }
}

TEST(FitQr, MatchesPointPairOracle) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const Index n = 4 + static_cast<Index>(seed % 7);
    const VectorXd x = random_vector(n, 100 + seed);
    const VectorXd y = 0.5 * x + random_vector(n, 200 + seed);
    const LinearFit f = fit_qr(with_intercept(x), y, 0.5);
    EXPECT_NEAR(f.objective, oracle::lad_point_pair(x, y), 1e-6) << "seed " << seed;
  }
}

TEST(FitQr, LadObjectiveIsHalfAbsoluteResiduals) {
  const MatrixXd x = random_matrix(25, 2, 4);
  const VectorXd y = random_vector(25, 5);
  const MatrixXd d = with_intercept(x);
  const LinearFit f = fit_qr(d, y, 0.5);
  EXPECT_NEAR(2.0 * f.objective, (y - d * f.slopes).cwiseAbs().sum(), 1e-10);
}

TEST(FitQr, ResidualSignBalance) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Index n = 30 + static_cast<Index>(seed);
    const double tau = 0.1 + 0.8 * static_cast<double>(seed % 9) / 8.0;
    const MatrixXd d = with_intercept(random_matrix(n, 2, seed));
    const VectorXd y = d * VectorXd::Ones(3) + random_vector(n, seed + 1000);
    const LinearFit f = fit_qr(d, y, tau);
    const VectorXd r = y - d * f.slopes;
    const double scale = 1e-9 * (1.0 + y.cwiseAbs().maxCoeff());
    const auto neg = (r.array() < -scale).count();
    const auto pos = (r.array() > scale).count();
    EXPECT_LE(static_cast<double>(neg), tau * n + 3);
    EXPECT_LE(static_cast<double>(pos), (1 - tau) * n + 3);
  }
}

TEST(FitQr, LocalOptimalityUnderPerturbation) {
  const MatrixXd d = with_intercept(random_matrix(40, 2, 8));
  const VectorXd y = random_vector(40, 9);
  const LinearFit f = fit_qr(d, y, 0.3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e-3, 1e-3);
  for (int trial = 0; trial < 1000; ++trial) {
    VectorXd c = f.slopes;
    for (Index j = 0; j < c.size(); ++j) c(j) += u(rng);
    EXPECT_GE(qr_objective(d, y, c, 0.3), f.objective - 1e-10);
  }
}

TEST(FitQr, RegressionEquivariance) {
  const MatrixXd d = with_intercept(random_matrix(30, 2, 12));
  const VectorXd y = random_vector(30, 13);
  VectorXd c(3);
  c << 1.5, -2.0, 0.25;
  const LinearFit a = fit_qr(d, y, 0.4);
  const LinearFit b = fit_qr(d, y + d * c, 0.4);
  EXPECT_LT((b.slopes - a.slopes - c).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(a.objective, b.objective, 1e-8);
}

TEST(FitQr, MmSolverAgrees) {
  const MatrixXd d = with_intercept(random_matrix(50, 3, 21));
  const VectorXd y = random_vector(50, 22);
  EXPECT_NEAR(fit_qr_mm(d, y, 0.7).objective, fit_qr(d, y, 0.7).objective, 1e-8);
}

TEST(FitQr, DegenerateTieBreaksToMinNorm) {
  // Even n: every point of [2,3] is a median; the min-norm vertex is 2.
  VectorXd y(4);
  y << 1, 2, 3, 4;
  const LinearFit f = fit_qr(MatrixXd::Ones(4, 1), y, 0.5);
  EXPECT_NEAR(f.slopes(0), 2.0, 1e-9);
  EXPECT_TRUE(f.diagnostics.degenerate);
  EXPECT_TRUE(f.diagnostics.vertex);
}

TEST(FitQr, Deterministic) {
  const MatrixXd d = with_intercept(random_matrix(35, 2, 31));
  const VectorXd y = random_vector(35, 32);
  const LinearFit a = fit_qr(d, y, 0.5);
  const LinearFit b = fit_qr(d, y, 0.5);
  EXPECT_EQ(a.slopes, b.slopes);
}

TEST(FitCqr, ExactLine) {
  const VectorXd x = VectorXd::LinSpaced(12, -1, 2);
  const LinearFit f = fit_cqr(x, 3.0 * x, {0.25, 0.5, 0.75});
  EXPECT_NEAR(f.slopes(0), 3.0, 1e-8);
  EXPECT_LT(f.intercepts.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FitCqr, NoCovariatesDecouplesLevels) {
  VectorXd y(4);
  y << 1, 2, 3, 4;
  const LinearFit f = fit_cqr(MatrixXd(4, 0), y, {0.25, 0.75});
  ASSERT_EQ(f.intercepts.size(), 2);
  // Per-level minimizers: level 0.25 -> 1 (objective flat on [1,2]; min norm), 0.75 -> 3 (flat on [3,4]).
  EXPECT_NEAR(f.objective, oracle::quantile_objective(y, 0.25) + oracle::quantile_objective(y, 0.75), 1e-9);
  EXPECT_GE(f.intercepts(0), 1.0 - 1e-9);
  EXPECT_LE(f.intercepts(0), 2.0 + 1e-9);
  EXPECT_GE(f.intercepts(1), 3.0 - 1e-9);
  EXPECT_LE(f.intercepts(1), 4.0 + 1e-9);
}

TEST(FitCqr, MatchesLatticeOracle) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const Index n = 5 + static_cast<Index>(seed % 4);
    const VectorXd x = random_vector(n, 300 + seed);
    const VectorXd y = x + random_vector(n, 400 + seed);
    const std::vector<double> levels = seed % 2 ? std::vector<double>{0.25, 0.5, 0.75}
                                                : CheckLossSpec::composite_uniform(9).levels();
    const LinearFit f = fit_cqr(x, y, levels);
    const double lattice = oracle::cqr_lattice(x, y, levels, -6.0, 6.0, 1e-3);
    EXPECT_LE(f.objective, lattice + 1e-9) << "seed " << seed;
    // The lattice misses the kink by at most half a step times the slope of the objective.
    const double kink = 0.5e-3 * static_cast<double>(levels.size()) * x.cwiseAbs().sum();
    EXPECT_GE(f.objective, lattice - kink - 1e-9) << "seed " << seed;
    EXPECT_NEAR(f.objective, oracle::cqr_pair_slopes(x, y, levels), 1e-6) << "seed " << seed;
  }
}

TEST(FitCqr, SingleLevelEqualsQr) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const MatrixXd x = random_matrix(25, 2, 500 + seed);
    const VectorXd y = random_vector(25, 600 + seed);
    const double tau = 0.2 + 0.06 * static_cast<double>(seed);
    const LinearFit c = fit_cqr(x, y, {tau});
    const LinearFit q = fit_qr(with_intercept(x), y, tau);
    EXPECT_NEAR(c.objective, q.objective, 1e-10);
  }
}

TEST(FitCqr, RegressionEquivariance) {
  const MatrixXd x = random_matrix(20, 2, 41);
  const VectorXd y = random_vector(20, 42);
  VectorXd c(2);
  c << -1.0, 0.5;
  const std::vector<double> levels{0.2, 0.5, 0.8};
  const LinearFit a = fit_cqr(x, y, levels);
  const LinearFit b = fit_cqr(x, y + x * c, levels);
  EXPECT_LT((b.slopes - a.slopes - c).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(a.objective, b.objective, 1e-8);
}

TEST(FitCqr, ObjectiveMatchesReportedFit) {
  const MatrixXd x = random_matrix(30, 1, 51);
  const VectorXd y = random_vector(30, 52);
  const auto levels = CheckLossSpec::composite_uniform(9).levels();
  const LinearFit f = fit_cqr(x, y, levels);
  EXPECT_NEAR(cqr_objective(x, y, f.intercepts, f.slopes, levels), f.objective, 1e-9);
}

TEST(FitLs, RecoversExactCoefficients) {
  const MatrixXd d = with_intercept(random_matrix(15, 3, 61));
  VectorXd c(4);
  c << 1, 2, 3, 4;
  EXPECT_LT((fit_ls(d, d * c).slopes - c).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FitLs, InterceptOnlyIsMean) {
  const VectorXd y = random_vector(9, 62);
  EXPECT_NEAR(fit_ls(MatrixXd::Ones(9, 1), y).slopes(0), y.mean(), 1e-12);
}

TEST(FitLs, MatchesNormalEquations) {
  const MatrixXd d = random_matrix(20, 3, 63);
  const VectorXd y = random_vector(20, 64);
  const VectorXd oracle = (d.transpose() * d).inverse() * d.transpose() * y;
  const LinearFit f = fit_ls(d, y);
  EXPECT_LT((f.slopes - oracle).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((d.transpose() * (y - d * f.slopes)).cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace
}  // namespace pfqr
