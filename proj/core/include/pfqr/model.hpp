#pragma once

// Finite-basis partial functional linear model under LS / QR / CQR losses.

#include "pfqr/extract.hpp"
#include "pfqr/qsolve.hpp"

#include <iosfwd>

namespace pfqr {

/// Which single prediction represents a CQR fit (MSE, CLI output column).
enum class CqrPrediction { MedianLevel, MeanOfLevels };

struct ModelFit {
  CheckLossSpec loss;
  /// One intercept (LS/QR) or one per level (CQR).
  VectorXd intercepts;
  VectorXd scalar_coefs;
  VectorXd basis_coefs;
  /// Coefficient function on the grid, original curve scale.
  VectorXd gamma_hat;
  /// sum_k basis_coefs(k) * score_k(z) = dt * sum_j gamma_hat(j) z_j + functional_offset
  double functional_offset = 0.0;
  ExtractionResult extraction;
  /// Training fitted values, n x (number of levels; 1 for LS/QR).
  MatrixXd fitted;
  SolverDiagnostics diagnostics;

  const Grid& grid() const noexcept { return extraction.grid(); }
  Index num_levels() const noexcept { return intercepts.size(); }

  /// gamma_hat recomputed from basis_coefs and the extraction weights.
  VectorXd reconstruct_gamma() const;
};

/// Joint fit of (intercepts, scalar coefficients, basis coefficients) on the
/// design [scalars | scores]. Coefficients are always refit jointly; the
/// covariances that produced the directions are never reused as coefficients.
ModelFit fit_model(const FunctionalSample& sample, const ExtractionResult& extraction, const CheckLossSpec& loss,
                   const SolverOptions& options = {});

/// n x levels predictions for new curves on the training grid. Replays the
/// training standardization, projection and deflation.
/// Throws GridMismatch or DimensionMismatch.
MatrixXd predict(const ModelFit& fit, const FunctionalSample& sample);

/// One prediction per subject; CQR fits collapse levels per `mode`.
VectorXd predict_point(const ModelFit& fit, const FunctionalSample& sample,
                       CqrPrediction mode = CqrPrediction::MedianLevel);

/// Collapses an n x levels prediction matrix the same way predict_point does.
VectorXd collapse_levels(const ModelFit& fit, const MatrixXd& predictions, CqrPrediction mode);

/// Mean training loss of a fit: mean squared residual (LS), mean check loss
/// (QR), or mean over subjects of the summed composite check loss (CQR).
double mean_loss(const CheckLossSpec& loss, const MatrixXd& predictions, const VectorXd& y);

/// JSON document: loss, coefficients, grid size, gamma_hat samples and the
/// extraction replay record. Doubles round-trip exactly.
void save_model(const ModelFit& fit, std::ostream& out);
ModelFit load_model(std::istream& in);

}  // namespace pfqr
