#include "pfqr/qcov.hpp"

#include "pfqr/error.hpp"

#include <cmath>

namespace pfqr {

namespace {

constexpr double kDegenerateProbeVariance = 1e-12;

void check_lengths(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters) {
  if (response.size() != probe.size() || (adjusters.cols() > 0 && adjusters.rows() != probe.size())) {
    throw Error(ErrorCode::DimensionMismatch, "response, probe and adjusters must have equal length");
  }
}

// [1 | adjusters | probe] when with_intercept, else [adjusters | probe].
MatrixXd joint_design(const VectorXd& probe, const MatrixXd& adjusters, bool with_intercept) {
  const Index n = probe.size();
  const Index offset = with_intercept ? 1 : 0;
  MatrixXd design(n, offset + adjusters.cols() + 1);
  if (with_intercept) design.col(0).setOnes();
  if (adjusters.cols() > 0) design.middleCols(offset, adjusters.cols()) = adjusters;
  design.col(design.cols() - 1) = standardize_probe(probe);
  return design;
}

}  // namespace

VectorXd standardize_probe(const VectorXd& probe) {
  const Index n = probe.size();
  if (n < 2) throw Error(ErrorCode::DegenerateProbe, "probe needs at least two observations");
  const double mean = probe.mean();
  const VectorXd centered = probe.array() - mean;
  const double variance = centered.squaredNorm() / static_cast<double>(n - 1);
  if (!(variance >= kDegenerateProbeVariance)) {
    throw Error(ErrorCode::DegenerateProbe, "probe variance is below 1e-12");
  }
  return centered / std::sqrt(variance);
}

double quantile_cov(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters, double tau,
                    const SolverOptions& options) {
  check_lengths(response, probe, adjusters);
  const MatrixXd design = joint_design(probe, adjusters, true);
  const LinearFit fit = fit_qr(design, response, tau, options);
  return fit.slopes(fit.slopes.size() - 1);
}

double composite_quantile_cov(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters,
                              const std::vector<double>& levels, const SolverOptions& options) {
  check_lengths(response, probe, adjusters);
  const MatrixXd design = joint_design(probe, adjusters, false);
  const LinearFit fit = fit_cqr(design, response, levels, options);
  return fit.slopes(fit.slopes.size() - 1);
}

double partial_cov(const VectorXd& response, const VectorXd& probe, const MatrixXd& adjusters) {
  check_lengths(response, probe, adjusters);
  const MatrixXd design = joint_design(probe, adjusters, true);
  const LinearFit fit = fit_ls(design, response);
  return fit.slopes(fit.slopes.size() - 1);
}

double covariance(const CovarianceRequest& request, const SolverOptions& options) {
  switch (request.loss.kind()) {
    case CheckLossSpec::Kind::LS:
      return partial_cov(request.response, request.probe, request.adjusters);
    case CheckLossSpec::Kind::QR:
      return quantile_cov(request.response, request.probe, request.adjusters, request.loss.tau(), options);
    case CheckLossSpec::Kind::CQR:
      return composite_quantile_cov(request.response, request.probe, request.adjusters, request.loss.levels(),
                                    options);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown loss kind");
}

}  // namespace pfqr
