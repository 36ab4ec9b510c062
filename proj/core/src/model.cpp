#include "pfqr/model.hpp"

#include "pfqr/error.hpp"

#include <cmath>

namespace pfqr {

namespace {

MatrixXd with_intercept(const MatrixXd& design) {
  MatrixXd out(design.rows(), design.cols() + 1);
  out << VectorXd::Ones(design.rows()), design;
  return out;
}

MatrixXd build_design(const MatrixXd& scalars, const MatrixXd& scores) {
  MatrixXd design(scores.rows(), scalars.cols() + scores.cols());
  design << scalars, scores;
  return design;
}

Index median_level_index(const CheckLossSpec& loss) {
  const auto& levels = loss.levels();
  Index best = 0;
  for (std::size_t l = 1; l < levels.size(); ++l) {
    if (std::abs(levels[l] - 0.5) < std::abs(levels[static_cast<std::size_t>(best)] - 0.5)) {
      best = static_cast<Index>(l);
    }
  }
  return best;
}

MatrixXd linear_predictions(const ModelFit& fit, const MatrixXd& design) {
  const VectorXd common = design * (VectorXd(fit.scalar_coefs.size() + fit.basis_coefs.size())
                                        << fit.scalar_coefs, fit.basis_coefs).finished();
  MatrixXd out(design.rows(), fit.intercepts.size());
  for (Index l = 0; l < fit.intercepts.size(); ++l) out.col(l) = common.array() + fit.intercepts(l);
  return out;
}

}  // namespace

VectorXd ModelFit::reconstruct_gamma() const {
  if (extraction.size() == 0) return VectorXd::Zero(grid().size());
  return extraction.weights.transpose() * basis_coefs;
}

ModelFit fit_model(const FunctionalSample& sample, const ExtractionResult& extraction, const CheckLossSpec& loss,
                   const SolverOptions& options) {
  if (!sample.has_responses()) throw Error(ErrorCode::InvalidArgument, "model fitting needs responses");
  if (!(sample.grid() == extraction.grid())) {
    throw Error(ErrorCode::GridMismatch, "extraction was computed on a different grid");
  }
  const MatrixXd& scores = extraction.scores.values;
  if (scores.rows() != sample.size() || scores.cols() != extraction.size()) {
    throw Error(ErrorCode::DimensionMismatch, "extraction scores do not match the sample");
  }
  const Index p = sample.num_scalars();
  const Index k = extraction.size();
  const MatrixXd design = build_design(sample.scalars(), scores);
  const VectorXd& y = sample.responses();

  ModelFit fit;
  fit.loss = loss;
  fit.extraction = extraction;
  VectorXd coefs;
  switch (loss.kind()) {
    case CheckLossSpec::Kind::LS:
    case CheckLossSpec::Kind::QR: {
      const LinearFit lf = loss.kind() == CheckLossSpec::Kind::LS
                               ? fit_ls(with_intercept(design), y)
                               : fit_qr(with_intercept(design), y, loss.tau(), options);
      fit.intercepts = lf.slopes.head(1);
      coefs = lf.slopes.tail(p + k);
      fit.diagnostics = lf.diagnostics;
      break;
    }
    case CheckLossSpec::Kind::CQR: {
      const LinearFit lf = fit_cqr(design, y, loss.levels(), options);
      fit.intercepts = lf.intercepts;
      coefs = lf.slopes;
      fit.diagnostics = lf.diagnostics;
      break;
    }
  }
  fit.scalar_coefs = coefs.head(p);
  fit.basis_coefs = coefs.tail(k);
  fit.gamma_hat = fit.reconstruct_gamma();
  const double dt = sample.grid().spacing();
  fit.functional_offset =
      k == 0 ? 0.0 : fit.basis_coefs.dot(extraction.score_offsets) - dt * fit.gamma_hat.dot(extraction.transform.mean.transpose());
  fit.fitted = linear_predictions(fit, design);
  return fit;
}

MatrixXd predict(const ModelFit& fit, const FunctionalSample& sample) {
  if (sample.grid().size() != fit.grid().size()) {
    throw Error(ErrorCode::GridMismatch, "curves have " + std::to_string(sample.grid().size()) +
                                             " grid points, the model expects " + std::to_string(fit.grid().size()));
  }
  if (sample.num_scalars() != fit.scalar_coefs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sample has " + std::to_string(sample.num_scalars()) +
                                                  " scalar covariates, the model expects " +
                                                  std::to_string(fit.scalar_coefs.size()));
  }
  const MatrixXd scores = fit.extraction.replay_scores(sample.curves());
  return linear_predictions(fit, build_design(sample.scalars(), scores));
}

VectorXd collapse_levels(const ModelFit& fit, const MatrixXd& predictions, CqrPrediction mode) {
  if (predictions.cols() != fit.num_levels()) {
    throw Error(ErrorCode::DimensionMismatch, "prediction matrix does not match the number of levels");
  }
  if (fit.loss.kind() != CheckLossSpec::Kind::CQR) return predictions.col(0);
  if (mode == CqrPrediction::MeanOfLevels) return predictions.rowwise().mean();
  return predictions.col(median_level_index(fit.loss));
}

VectorXd predict_point(const ModelFit& fit, const FunctionalSample& sample, CqrPrediction mode) {
  return collapse_levels(fit, predict(fit, sample), mode);
}

double mean_loss(const CheckLossSpec& loss, const MatrixXd& predictions, const VectorXd& y) {
  if (predictions.rows() != y.size() || predictions.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "predictions do not match the responses");
  }
  const Index n = y.size();
  if (n == 0) return 0.0;
  double total = 0.0;
  switch (loss.kind()) {
    case CheckLossSpec::Kind::LS:
      total = (y - predictions.col(0)).squaredNorm();
      break;
    case CheckLossSpec::Kind::QR:
      for (Index i = 0; i < n; ++i) total += check_loss(y(i) - predictions(i, 0), loss.tau());
      break;
    case CheckLossSpec::Kind::CQR: {
      const auto& levels = loss.levels();
      if (predictions.cols() != static_cast<Index>(levels.size())) {
        throw Error(ErrorCode::DimensionMismatch, "composite predictions need one column per level");
      }
      for (Index l = 0; l < predictions.cols(); ++l) {
        for (Index i = 0; i < n; ++i) total += check_loss(y(i) - predictions(i, l), levels[static_cast<std::size_t>(l)]);
      }
      break;
    }
  }
  return total / static_cast<double>(n);
}

}  // namespace pfqr
