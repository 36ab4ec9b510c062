#pragma once

// (Partial) quantile, composite quantile and mean covariances: the coefficient
// of a standardized probe variable in a joint fit of the response on
// (intercept, adjusters, probe).

#include "pfqr/qsolve.hpp"

#include <Eigen/Dense>

namespace pfqr {

struct CovarianceRequest {
  const VectorXd& response;
  const VectorXd& probe;
  /// n x p adjuster block; p = 0 means no adjusters.
  const MatrixXd& adjusters;
  CheckLossSpec loss;
};

/// Coefficient of the standardized probe in a QR of the response on
/// (1, adjusters, probe). Throws DegenerateProbe when the probe variance is
/// below 1e-12; solver errors propagate.
double quantile_cov(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters, double tau,
                    const SolverOptions& options = {});

/// Shared coefficient of the standardized probe in a CQR of the response on
/// (adjusters, probe) with level-specific intercepts.
double composite_quantile_cov(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters,
                              const std::vector<double>& levels, const SolverOptions& options = {});

/// Least-squares analogue: OLS coefficient of the standardized probe.
double partial_cov(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters);

/// Dispatches on request.loss.
double covariance(const CovarianceRequest& request, const SolverOptions& options = {});

/// Probe rescaled to sample mean 0 and sample variance 1 (denominator n-1).
VectorXd standardize_probe(const VectorXd& probe);

}  // namespace pfqr
