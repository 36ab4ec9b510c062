#pragma once

// Sequential basis extraction (standardize -> direction -> project -> deflate)
// for PQR, PCQR and PLS bases, plus the fPC baseline and basis-count selection.

#include "pfqr/fgrid.hpp"
#include "pfqr/qsolve.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace pfqr {

enum class StopRule { FixedK, CrossValidation, BIC };

/// How curve columns enter the PLS/PQR/PCQR extraction.
enum class ColumnScaling {
  /// Columns scaled to unit variance; direction entries are the covariances
  /// with the standardized columns.
  Standardize,
  /// Columns only centered; direction entries are the standardized-probe
  /// covariances times the column standard deviation (for least squares the
  /// plain sample covariance), as in classical functional PLS.
  CenterOnly,
};

std::string_view to_string(ColumnScaling scaling) noexcept;
ColumnScaling column_scaling_from_string(std::string_view name);

struct ExtractionConfig {
  BasisMethod method = BasisMethod::PQR;
  /// Covariance loss for PQR (QR) and PCQR (CQR); PLS always uses least
  /// squares. For fPC it is the loss used when selecting K.
  CheckLossSpec loss = CheckLossSpec::quantile(0.5);
  Index k_max = 1;
  StopRule stop_rule = StopRule::FixedK;
  int cv_folds = 5;
  /// Pass scalar covariates as adjusters into every covariance evaluation.
  bool scalars_as_adjusters = true;
  DegenerateColumnPolicy column_policy = DegenerateColumnPolicy::KeepUnscaled;
  ColumnScaling scaling = ColumnScaling::Standardize;
  std::uint64_t seed = 0;
  /// Worker threads for the per-column covariance solves.
  int threads = 1;
  SolverOptions solver;

  /// Throws InvalidArgument on an inconsistent configuration for a sample of
  /// n curves on m grid points.
  void validate(Index n, Index m) const;
};

/// Loss used for the per-column covariances of `method`.
CheckLossSpec covariance_loss(BasisMethod method, const CheckLossSpec& requested);

/// Everything needed to map new curves onto the training scores.
///
/// score_k(z) = dt * sum_j (z_j - mean_j) * weights(k, j) + score_offsets(k)
///
/// `weights` re-express the directions (which live in successively deflated,
/// standardized coordinates) in the original curve coordinates. The same
/// scores are also reproducible by literally replaying standardization,
/// projection and deflation with the stored parameters.
struct ExtractionResult {
  BasisMethod method = BasisMethod::PQR;
  ColumnTransform transform;
  /// Unit-norm (L2-weighted) directions, one row per step.
  BasisSet directions;
  MatrixXd deflation_intercepts;  // K x m
  MatrixXd deflation_slopes;      // K x m
  MatrixXd weights;               // K x m
  VectorXd score_offsets;         // K
  ScoreMatrix scores;             // training scores, n x K
  /// Frobenius norm of the curve matrix entering each step.
  std::vector<double> residual_norms;
  /// Stopped before k_max because the covariance direction vanished.
  bool exhausted = false;
  /// fPC only: fewer positive eigenvalues than requested.
  bool rank_truncated = false;

  Index size() const noexcept { return directions.size(); }
  const Grid& grid() const noexcept { return directions.grid; }

  /// Leading k steps. Extraction is greedy, so this equals running with k_max = k.
  ExtractionResult truncated(Index k) const;

  /// Scores of new curves by replaying standardize / project / deflate.
  MatrixXd replay_scores(const MatrixXd& curves) const;
  /// Scores of new curves through the original-coordinate weights.
  MatrixXd linear_scores(const MatrixXd& curves) const;
};

struct Direction {
  VectorXd values;        // unit-norm direction on the grid
  double raw_norm = 0.0;  // L2-weighted norm of the column covariances before rescaling
};

/// Column-wise covariance of the response with each grid column of the
/// (standardized or deflated) curves, rescaled to unit L2-weighted norm.
/// With CenterOnly each entry is multiplied by the column's sample sd.
/// Columns with vanishing variance contribute 0. Throws AllZeroDirection when
/// every column covariance is below 1e-12.
Direction extract_one(const FunctionalSample& sample, const CheckLossSpec& loss, bool scalars_as_adjusters = true,
                      int threads = 1, const SolverOptions& options = {},
                      ColumnScaling scaling = ColumnScaling::Standardize);

struct Deflation {
  FunctionalSample residuals;
  RowVectorXd intercepts;
  RowVectorXd slopes;
};

/// Replaces every grid column by its residual from a simple least-squares
/// regression (intercept + slope) on the score. Throws DegenerateScore when
/// the score has (near) zero variance.
Deflation deflate(const FunctionalSample& sample, const VectorXd& score);

/// Runs the extraction. With a CV or BIC stop rule the basis count is chosen
/// by select_k first. Stops early, flagging `exhausted`, on AllZeroDirection.
ExtractionResult run_extraction(const FunctionalSample& sample, const ExtractionConfig& config);

/// CV: K in 1..k_max minimizing the mean held-out loss (check loss, composite
/// check loss, or squared error for least squares) across folds.
/// BIC: K minimizing n * log(mean training loss) + K * log(n).
/// Ties go to the smaller K.
Index select_k(const FunctionalSample& sample, const ExtractionConfig& config);

}  // namespace pfqr
