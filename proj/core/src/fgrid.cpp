#include "pfqr/fgrid.hpp"

#include "pfqr/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pfqr {

namespace {

constexpr double kDegenerateVariance = 1e-12;
constexpr double kGridTolerance = 1e-9;
constexpr double kRelativeEigenFloor = 1e-10;

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::NonFinite, std::string(what) + " contains non-finite entries");
  }
}

void fix_sign(Eigen::Ref<RowVectorXd, 0, Eigen::InnerStride<>> row) {
  Index arg = 0;
  row.cwiseAbs().maxCoeff(&arg);
  if (row(arg) < 0.0) row = -row;
}

}  // namespace

Grid Grid::uniform(Index m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
  return Grid(VectorXd::LinSpaced(m, 0.0, 1.0));
}

Grid Grid::from_points(const VectorXd& points) {
  if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 points");
  Grid reference = uniform(points.size());
  for (Index j = 0; j < points.size(); ++j) {
    if (!std::isfinite(points(j)) || std::abs(points(j) - reference[j]) > kGridTolerance) {
      throw Error(ErrorCode::NonUniformGrid,
                  "grid point " + std::to_string(j + 1) + " deviates from the uniform grid on [0,1]");
    }
  }
  return reference;
}

std::string_view to_string(InnerProduct convention) noexcept {
  return convention == InnerProduct::GridSum ? "grid-sum" : "l2-weighted";
}

FunctionalSample::FunctionalSample(Grid grid, MatrixXd curves, MatrixXd scalars, VectorXd responses)
    : grid_(std::move(grid)),
      curves_(std::move(curves)),
      scalars_(std::move(scalars)),
      responses_(std::move(responses)) {
  if (curves_.rows() < 1) throw Error(ErrorCode::InvalidArgument, "sample needs at least one curve");
  if (curves_.cols() != grid_.size()) {
    throw Error(ErrorCode::GridMismatch, "curves have " + std::to_string(curves_.cols()) +
                                             " columns but the grid has " +
                                             std::to_string(grid_.size()) + " points");
  }
  if (scalars_.size() == 0) scalars_.resize(curves_.rows(), 0);
  if (scalars_.rows() != curves_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "scalar covariate rows do not match curve rows");
  }
  if (responses_.size() != 0 && responses_.size() != curves_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "response length does not match curve rows");
  }
  require_finite(curves_, "curves");
  require_finite(scalars_, "scalar covariates");
  require_finite(responses_, "responses");
}

FunctionalSample FunctionalSample::with_curves(MatrixXd curves) const {
  return FunctionalSample(grid_, std::move(curves), scalars_, responses_);
}

FunctionalSample FunctionalSample::with_responses(VectorXd responses) const {
  return FunctionalSample(grid_, curves_, scalars_, std::move(responses));
}

FunctionalSample FunctionalSample::subset(const std::vector<Index>& rows) const {
  const auto count = static_cast<Index>(rows.size());
  MatrixXd curves(count, curves_.cols());
  MatrixXd scalars(count, scalars_.cols());
  VectorXd responses(has_responses() ? count : 0);
  for (Index r = 0; r < count; ++r) {
    const Index src = rows[static_cast<std::size_t>(r)];
    if (src < 0 || src >= size()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
    curves.row(r) = curves_.row(src);
    scalars.row(r) = scalars_.row(src);
    if (has_responses()) responses(r) = responses_(src);
  }
  return FunctionalSample(grid_, std::move(curves), std::move(scalars), std::move(responses));
}

std::string_view to_string(BasisMethod method) noexcept {
  switch (method) {
    case BasisMethod::FPC: return "fpc";
    case BasisMethod::PLS: return "pls";
    case BasisMethod::PQR: return "pqr";
    case BasisMethod::PCQR: return "pcqr";
  }
  return "unknown";
}

BasisMethod basis_method_from_string(std::string_view name) {
  if (name == "fpc") return BasisMethod::FPC;
  if (name == "pls") return BasisMethod::PLS;
  if (name == "pqr") return BasisMethod::PQR;
  if (name == "pcqr") return BasisMethod::PCQR;
  throw Error(ErrorCode::InvalidArgument, "unknown basis method '" + std::string(name) + "'");
}

double BasisSet::max_norm_error() const {
  const double weight = normalization == InnerProduct::L2Weighted ? grid.spacing() : 1.0;
  double worst = 0.0;
  for (Index k = 0; k < functions.rows(); ++k) {
    worst = std::max(worst, std::abs(std::sqrt(weight * functions.row(k).squaredNorm()) - 1.0));
  }
  return worst;
}

MatrixXd ColumnTransform::apply(const MatrixXd& curves) const {
  if (curves.cols() != mean.size()) {
    throw Error(ErrorCode::GridMismatch, "curves do not match the transform's grid");
  }
  return (curves.rowwise() - mean).array().rowwise() / scale.array();
}

Standardized standardize_columns(const FunctionalSample& sample, DegenerateColumnPolicy policy) {
  const Index n = sample.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "standardization needs at least 2 curves");
  const MatrixXd& z = sample.curves();
  ColumnTransform transform;
  transform.mean = z.colwise().mean();
  const MatrixXd centered = z.rowwise() - transform.mean;
  const RowVectorXd variance = centered.colwise().squaredNorm() / static_cast<double>(n - 1);
  transform.scale.resize(z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    if (variance(j) < kDegenerateVariance) {
      if (policy == DegenerateColumnPolicy::Throw) {
        throw Error(ErrorCode::DegenerateColumn,
                    "grid column " + std::to_string(j + 1) + " has (near) zero variance");
      }
      transform.scale(j) = 1.0;
    } else {
      transform.scale(j) = std::sqrt(variance(j));
    }
  }
  MatrixXd scaled = centered.array().rowwise() / transform.scale.array();
  return {sample.with_curves(std::move(scaled)), std::move(transform)};
}

double inner_product(const Grid& grid, const Eigen::Ref<const VectorXd>& f,
                     const Eigen::Ref<const VectorXd>& g, InnerProduct convention) {
  if (f.size() != grid.size() || g.size() != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "grid functions do not match the grid size");
  }
  const double sum = f.dot(g);
  return convention == InnerProduct::L2Weighted ? grid.spacing() * sum : sum;
}

ScoreMatrix project(const FunctionalSample& sample, const BasisSet& basis) {
  if (!(sample.grid() == basis.grid) || basis.functions.cols() != sample.grid().size()) {
    throw Error(ErrorCode::GridMismatch, "sample and basis live on different grids");
  }
  ScoreMatrix scores;
  scores.method = basis.method;
  scores.convention = basis.normalization;
  scores.values = sample.curves() * basis.functions.transpose();
  if (basis.normalization == InnerProduct::L2Weighted) scores.values *= sample.grid().spacing();
  return scores;
}

FpcResult fpc_basis(const FunctionalSample& sample, Index k) {
  const Index n = sample.size();
  const Index m = sample.grid().size();
  if (k < 0 || k > std::min(n - 1, m)) {
    throw Error(ErrorCode::InvalidArgument, "number of fPCs must lie in [0, min(n-1, m)]");
  }
  FpcResult result;
  result.mean = sample.curves().colwise().mean();
  result.basis.grid = sample.grid();
  result.basis.method = BasisMethod::FPC;
  result.basis.normalization = InnerProduct::L2Weighted;
  if (k == 0) {
    result.basis.functions.resize(0, m);
    result.eigenvalues.resize(0);
    return result;
  }

  const MatrixXd centered = sample.curves().rowwise() - result.mean;
  const double dt = sample.grid().spacing();
  const double denom = static_cast<double>(n - 1);

  // Eigenvectors (unit Euclidean norm, columns) of the m x m sample covariance
  // and its eigenvalues, largest first.
  MatrixXd vectors;
  VectorXd values;
  if (n < m) {
    const MatrixXd gram = centered * centered.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    values = eig.eigenvalues().reverse();
    vectors = centered.transpose() * eig.eigenvectors().rowwise().reverse();
    for (Index c = 0; c < vectors.cols(); ++c) {
      const double norm = vectors.col(c).norm();
      if (norm > 0.0) vectors.col(c) /= norm;
    }
  } else {
    const MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
    values = eig.eigenvalues().reverse();
    vectors = eig.eigenvectors().rowwise().reverse();
  }

  const double top = values.size() > 0 ? values(0) : 0.0;
  Index positive = 0;
  while (positive < values.size() && top > 0.0 && values(positive) > kRelativeEigenFloor * top) {
    ++positive;
  }
  const Index kept = std::min(k, positive);
  result.truncated = kept < k;
  result.eigenvalues = values.head(kept) * dt;
  result.basis.functions.resize(kept, m);
  const double to_l2 = 1.0 / std::sqrt(dt);
  for (Index r = 0; r < kept; ++r) {
    result.basis.functions.row(r) = vectors.col(r).transpose() * to_l2;
    fix_sign(result.basis.functions.row(r));
  }
  return result;
}

}  // namespace pfqr
