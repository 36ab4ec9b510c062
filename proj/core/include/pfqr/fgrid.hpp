#pragma once

// Grid-based functional numerics: uniform grids, functional samples,
// discretized bases, projections and functional principal components.

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace pfqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

/// Uniform grid t_j = (j-1)/(m-1), j = 1..m, on [0,1].
class Grid {
 public:
  /// Two-point grid {0, 1}; placeholder for default-constructed aggregates.
  Grid() : points_(VectorXd::LinSpaced(2, 0.0, 1.0)) {}

  /// Throws InvalidArgument when m < 2.
  static Grid uniform(Index m);

  /// Validates that the points are strictly increasing, lie in [0,1] and
  /// coincide with the uniform grid of the same size; throws NonUniformGrid
  /// otherwise.
  static Grid from_points(const VectorXd& points);

  Index size() const noexcept { return points_.size(); }
  double spacing() const noexcept { return 1.0 / static_cast<double>(points_.size() - 1); }
  double operator[](Index j) const { return points_(j); }
  const VectorXd& points() const noexcept { return points_; }

  bool operator==(const Grid& other) const noexcept { return size() == other.size(); }

 private:
  explicit Grid(VectorXd points) : points_(std::move(points)) {}

  VectorXd points_;
};

enum class InnerProduct {
  GridSum,     // sum_j f(t_j) g(t_j)
  L2Weighted,  // dt * sum_j f(t_j) g(t_j)
};

std::string_view to_string(InnerProduct convention) noexcept;

/// Curves observed on a common grid, optionally with scalar covariates and
/// responses. Immutable once constructed; the constructor validates shapes
/// and finiteness.
class FunctionalSample {
 public:
  FunctionalSample(Grid grid, MatrixXd curves, MatrixXd scalars = MatrixXd(),
                   VectorXd responses = VectorXd());

  const Grid& grid() const noexcept { return grid_; }
  const MatrixXd& curves() const noexcept { return curves_; }
  /// n x p, with p = 0 when the sample carries no scalar covariates.
  const MatrixXd& scalars() const noexcept { return scalars_; }
  const VectorXd& responses() const noexcept { return responses_; }

  Index size() const noexcept { return curves_.rows(); }
  Index num_scalars() const noexcept { return scalars_.cols(); }
  bool has_responses() const noexcept { return responses_.size() > 0; }

  FunctionalSample with_curves(MatrixXd curves) const;
  FunctionalSample with_responses(VectorXd responses) const;
  /// Rows selected by index, in the given order.
  FunctionalSample subset(const std::vector<Index>& rows) const;

 private:
  Grid grid_;
  MatrixXd curves_;
  MatrixXd scalars_;
  VectorXd responses_;
};

enum class BasisMethod { FPC, PLS, PQR, PCQR };

std::string_view to_string(BasisMethod method) noexcept;
BasisMethod basis_method_from_string(std::string_view name);

/// K discretized basis functions; row k holds b_k(t_j).
struct BasisSet {
  Grid grid;
  MatrixXd functions;
  BasisMethod method = BasisMethod::FPC;
  InnerProduct normalization = InnerProduct::L2Weighted;

  Index size() const noexcept { return functions.rows(); }
  /// Largest deviation of a row norm from 1 under the declared convention.
  double max_norm_error() const;
};

struct ScoreMatrix {
  MatrixXd values;  // n x K
  BasisMethod method = BasisMethod::FPC;
  InnerProduct convention = InnerProduct::L2Weighted;
};

/// Per-column affine map z -> (z - mean) / scale recorded by
/// standardize_columns, reusable on new curves observed on the same grid.
struct ColumnTransform {
  RowVectorXd mean;
  RowVectorXd scale;

  MatrixXd apply(const MatrixXd& curves) const;
};

enum class DegenerateColumnPolicy {
  Throw,         // raise DegenerateColumn
  KeepUnscaled,  // center the column but leave its scale at 1
};

struct Standardized {
  FunctionalSample sample;
  ColumnTransform transform;
};

/// Every column gets sample mean 0 and sample variance 1 (denominator n-1).
/// Columns with variance below 1e-12 raise DegenerateColumn unless the policy
/// keeps them unscaled.
Standardized standardize_columns(const FunctionalSample& sample,
                                 DegenerateColumnPolicy policy = DegenerateColumnPolicy::Throw);

double inner_product(const Grid& grid, const Eigen::Ref<const VectorXd>& f,
                     const Eigen::Ref<const VectorXd>& g, InnerProduct convention);

/// score(i, k) = <curve_i, basis_k> under the basis' normalization convention.
/// Curves are used as given; center them first when that is intended.
ScoreMatrix project(const FunctionalSample& sample, const BasisSet& basis);

struct FpcResult {
  BasisSet basis;
  VectorXd eigenvalues;  // covariance-operator eigenvalues, decreasing
  RowVectorXd mean;      // column means removed before decomposition
  bool truncated = false;
};

/// Top-K eigenfunctions of the empirical covariance operator of the centered
/// curves, L2-normalized, sign fixed so the largest-magnitude entry of each
/// row is positive. When fewer than K eigenvalues are numerically positive
/// the result holds fewer rows and `truncated` is set.
FpcResult fpc_basis(const FunctionalSample& sample, Index k);

}  // namespace pfqr
