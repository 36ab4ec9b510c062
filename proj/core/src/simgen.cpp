#include "pfqr/simgen.hpp"

#include "pfqr/error.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace pfqr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stream labels inside one generated data set.
constexpr std::uint64_t kCurveStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kShapeStream = 3;

double sample_sd(const VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string_view to_string(ErrorLaw law) noexcept {
  return law == ErrorLaw::Gaussian ? "gaussian" : "cauchy";
}

ErrorLaw error_law_from_string(std::string_view name) {
  if (name == "gaussian") return ErrorLaw::Gaussian;
  if (name == "cauchy") return ErrorLaw::Cauchy;
  throw Error(ErrorCode::InvalidArgument, "unknown error law '" + std::string(name) + "'");
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

VectorXd sample_error(ErrorLaw law, Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  VectorXd out(n);
  if (law == ErrorLaw::Gaussian) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i) out(i) = normal(rng);
  } else {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    for (Index i = 0; i < n; ++i) out(i) = std::tan(std::numbers::pi * (uniform(rng) - 0.5));
  }
  return out;
}

double error_quantile(ErrorLaw law, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0,1)");
  if (law == ErrorLaw::Gaussian) return boost::math::quantile(boost::math::normal_distribution<double>(), tau);
  return std::tan(std::numbers::pi * (tau - 0.5));
}

MatrixXd sim1_basis(const Grid& grid, int components) {
  MatrixXd phi(components, grid.size());
  for (int j = 1; j <= components; ++j) {
    phi.row(j - 1) = std::sqrt(2.0) * (grid.points().array() * (j * std::numbers::pi)).cos().transpose();
  }
  return phi;
}

VectorXd sim1_gamma_coefficients(int components) {
  VectorXd g(components);
  for (int j = 1; j <= components; ++j) {
    g(j - 1) = j == 1 ? 0.5 : (20.0 / 3.0) * (j % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(j * j);
  }
  return g;
}

VectorXd sim1_loadings(int components) {
  VectorXd v(components);
  for (int j = 1; j <= components; ++j) v(j - 1) = (j % 2 == 1 ? 1.0 : -1.0) * std::pow(j, -0.55);
  return v;
}

SimData gen_sim1(const Sim1Design& design) {
  if (design.n < 1 || design.m < 2 || design.components < 1) {
    throw Error(ErrorCode::InvalidArgument, "simulation I needs n >= 1, m >= 2 and at least one component");
  }
  const Grid grid = Grid::uniform(design.m);
  const MatrixXd phi = sim1_basis(grid, design.components);
  const VectorXd v = sim1_loadings(design.components);

  std::mt19937_64 rng(derive_seed(design.seed, kCurveStream, 0));
  std::uniform_real_distribution<double> uniform(-std::sqrt(3.0), std::sqrt(3.0));
  MatrixXd loadings(design.n, design.components);
  for (Index i = 0; i < design.n; ++i) {
    for (Index j = 0; j < design.components; ++j) loadings(i, j) = v(j) * uniform(rng);
  }
  MatrixXd curves = loadings * phi;
  VectorXd gamma = phi.transpose() * sim1_gamma_coefficients(design.components);
  VectorXd signal = grid.spacing() * (curves * gamma);
  VectorXd noise = sample_error(design.law, design.n, derive_seed(design.seed, kNoiseStream, 0));
  VectorXd y = signal + noise;
  return {FunctionalSample(grid, std::move(curves), MatrixXd(), std::move(y)), std::move(gamma), std::move(signal),
          std::move(noise)};
}

std::string_view to_string(Sim2Case c) noexcept {
  switch (c) {
    case Sim2Case::I: return "i";
    case Sim2Case::II: return "ii";
    case Sim2Case::III: return "iii";
    case Sim2Case::IV: return "iv";
  }
  return "i";
}

Sim2Case sim2_case_from_string(std::string_view name) {
  if (name == "i") return Sim2Case::I;
  if (name == "ii") return Sim2Case::II;
  if (name == "iii") return Sim2Case::III;
  if (name == "iv") return Sim2Case::IV;
  throw Error(ErrorCode::InvalidArgument, "unknown simulation II case '" + std::string(name) + "'");
}

VectorXd sim2_coefficients(Sim2Case c) {
  const int first = 1 + 5 * static_cast<int>(c);
  VectorXd a = VectorXd::Zero(kSim2Components);
  for (int j = first; j < first + 5; ++j) a(j - 1) = j % 2 == 0 ? 1.0 : -1.0;
  return a;
}

Sim2Source make_sim2_source(const FunctionalSample& curves) {
  if (curves.size() <= kSim2Components) {
    throw Error(ErrorCode::InsufficientRank, "simulation II needs more than 20 source curves");
  }
  FpcResult fpc = fpc_basis(curves, kSim2Components);
  if (fpc.basis.size() < kSim2Components) {
    throw Error(ErrorCode::InsufficientRank, "source curves have only " + std::to_string(fpc.basis.size()) +
                                                 " positive covariance eigenvalues; 20 are needed");
  }
  return {curves, std::move(fpc)};
}

FunctionalSample synthetic_sim2_curves(Index n, Index m, std::uint64_t seed) {
  constexpr int kTerms = 30;
  constexpr double kFloorSd = 0.1;
  const Grid grid = Grid::uniform(m);
  const VectorXd& t = grid.points();

  std::mt19937_64 shape_rng(derive_seed(seed, kShapeStream, 0));
  std::uniform_real_distribution<double> damping(0.5, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  MatrixXd terms(kTerms, m);
  for (int k = 1; k <= kTerms; ++k) {
    const double d = damping(shape_rng);
    const double theta = phase(shape_rng);
    terms.row(k - 1) = ((-d * t.array()).exp() * (k * std::numbers::pi * t.array() + theta).cos()).transpose();
  }
  const RowVectorXd mean = (2.0 - 1.5 * t.array()).exp().transpose();

  std::mt19937_64 rng(derive_seed(seed, kCurveStream, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd amplitudes(n, kTerms);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < kTerms; ++k) amplitudes(i, k) = std::exp(-0.1 * k) * normal(rng);
  }
  MatrixXd curves = amplitudes * terms;
  curves.rowwise() += mean;
  // Rough floor, as in log-periodograms; keeps the trailing eigenvalues from collapsing.
  std::mt19937_64 floor_rng(derive_seed(seed, kNoiseStream, 1));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) curves(i, j) += kFloorSd * normal(floor_rng);
  }
  return FunctionalSample(grid, std::move(curves));
}

VectorXd sim2_gamma(const Sim2Source& source, Sim2Case c) {
  return source.fpc.basis.functions.transpose() * sim2_coefficients(c);
}

double sim2_error_scale(const VectorXd& signal, double noise_factor) {
  return sample_sd(signal) * std::sqrt(5.0) * noise_factor;
}

SimData gen_sim2(const Sim2Source& source, const Sim2Design& design) {
  if (!(design.noise_factor >= 0.0) || !std::isfinite(design.noise_factor)) {
    throw Error(ErrorCode::InvalidArgument, "noise factor must be finite and nonnegative");
  }
  const FunctionalSample& curves = source.curves;
  VectorXd gamma = sim2_gamma(source, design.which);
  VectorXd signal = curves.grid().spacing() * (curves.curves() * gamma);
  const double scale = sim2_error_scale(signal, design.noise_factor);
  VectorXd noise = scale * sample_error(design.law, curves.size(), derive_seed(design.seed, kNoiseStream, 0));
  VectorXd y = signal + noise;
  return {curves.with_responses(std::move(y)), std::move(gamma), std::move(signal), std::move(noise)};
}

}  // namespace pfqr
