#include "pfqr/extract.hpp"

#include "pfqr/error.hpp"
#include "pfqr/model.hpp"
#include "pfqr/parallel.hpp"
#include "pfqr/qcov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace pfqr {

namespace {

constexpr double kZeroCovariance = 1e-12;
constexpr double kDegenerateScoreVariance = 1e-12;

Standardized center_columns(const FunctionalSample& sample) {
  ColumnTransform transform;
  transform.mean = sample.curves().colwise().mean();
  transform.scale = RowVectorXd::Ones(sample.grid().size());
  MatrixXd centered = sample.curves().rowwise() - transform.mean;
  return {sample.with_curves(std::move(centered)), std::move(transform)};
}

ExtractionResult empty_result(const FunctionalSample& sample, BasisMethod method) {
  const Index m = sample.grid().size();
  ExtractionResult result;
  result.method = method;
  result.directions.grid = sample.grid();
  result.directions.method = method;
  result.directions.normalization = InnerProduct::L2Weighted;
  result.directions.functions.resize(0, m);
  result.deflation_intercepts.resize(0, m);
  result.deflation_slopes.resize(0, m);
  result.weights.resize(0, m);
  result.score_offsets.resize(0);
  result.scores.values.resize(sample.size(), 0);
  result.scores.method = method;
  result.scores.convention = InnerProduct::L2Weighted;
  return result;
}

ExtractionResult run_fpc(const FunctionalSample& sample, Index k) {
  ExtractionResult result = empty_result(sample, BasisMethod::FPC);
  const FpcResult fpc = fpc_basis(sample, k);
  const Index kept = fpc.basis.size();
  result.transform.mean = fpc.mean;
  result.transform.scale = RowVectorXd::Ones(sample.grid().size());
  result.directions = fpc.basis;
  result.rank_truncated = fpc.truncated;
  result.deflation_intercepts = MatrixXd::Zero(kept, sample.grid().size());
  result.deflation_slopes = MatrixXd::Zero(kept, sample.grid().size());
  result.weights = fpc.basis.functions;
  result.score_offsets = VectorXd::Zero(kept);
  const FunctionalSample centered = sample.with_curves(sample.curves().rowwise() - fpc.mean);
  result.scores = project(centered, fpc.basis);
  result.residual_norms.assign(static_cast<std::size_t>(kept), centered.curves().norm());
  return result;
}

ExtractionResult run_sequential(const FunctionalSample& sample, const ExtractionConfig& config, Index k) {
  const Index n = sample.size();
  const Index m = sample.grid().size();
  const double dt = sample.grid().spacing();
  const CheckLossSpec loss = covariance_loss(config.method, config.loss);

  Standardized standardized = config.scaling == ColumnScaling::Standardize
                                  ? standardize_columns(sample, config.column_policy)
                                  : center_columns(sample);
  ExtractionResult result = empty_result(sample, config.method);
  result.transform = standardized.transform;

  MatrixXd directions(k, m);
  MatrixXd intercepts(k, m);
  MatrixXd slopes(k, m);
  MatrixXd effective(k, m);  // weights in standardized coordinates
  VectorXd offsets(k);
  MatrixXd scores(n, k);
  RowVectorXd row_offset = RowVectorXd::Zero(m);

  FunctionalSample current = std::move(standardized.sample);
  Index steps = 0;
  for (; steps < k; ++steps) {
    result.residual_norms.push_back(current.curves().norm());
    Direction direction;
    try {
      direction =
          extract_one(current, loss, config.scalars_as_adjusters, config.threads, config.solver, config.scaling);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllZeroDirection) throw;
      result.residual_norms.pop_back();
      result.exhausted = true;
      break;
    }
    const VectorXd& b = direction.values;
    const VectorXd score = dt * (current.curves() * b);

    VectorXd r = b;
    for (Index j = 0; j < steps; ++j) r -= effective.row(j).transpose() * (dt * slopes.row(j).dot(b));

    Deflation deflation = deflate(current, score);
    directions.row(steps) = b.transpose();
    intercepts.row(steps) = deflation.intercepts;
    slopes.row(steps) = deflation.slopes;
    effective.row(steps) = r.transpose();
    offsets(steps) = dt * row_offset.dot(b.transpose());
    row_offset -= deflation.intercepts + offsets(steps) * deflation.slopes;
    scores.col(steps) = score;
    current = std::move(deflation.residuals);
  }

  result.directions.functions = directions.topRows(steps);
  result.deflation_intercepts = intercepts.topRows(steps);
  result.deflation_slopes = slopes.topRows(steps);
  result.weights = effective.topRows(steps).array().rowwise() / result.transform.scale.array();
  result.score_offsets = offsets.head(steps);
  result.scores.values = scores.leftCols(steps);
  return result;
}

// Mean out-of-sample loss per candidate K (index K-1) for one train/test split.
VectorXd held_out_losses(const FunctionalSample& train, const FunctionalSample& test,
                         const ExtractionConfig& config, const CheckLossSpec& model_loss) {
  ExtractionConfig fixed = config;
  fixed.stop_rule = StopRule::FixedK;
  const ExtractionResult full = run_extraction(train, fixed);
  VectorXd losses = VectorXd::Constant(config.k_max, std::numeric_limits<double>::infinity());
  for (Index k = 1; k <= full.size(); ++k) {
    const ModelFit fit = fit_model(train, full.truncated(k), model_loss, config.solver);
    losses(k - 1) = mean_loss(model_loss, predict(fit, test), test.responses());
  }
  // An exhausted extraction keeps its last model for larger K.
  for (Index k = full.size() + 1; k <= config.k_max && full.size() > 0; ++k) losses(k - 1) = losses(full.size() - 1);
  return losses;
}

CheckLossSpec selection_loss(const ExtractionConfig& config) {
  if (config.method == BasisMethod::FPC) return config.loss;
  return covariance_loss(config.method, config.loss);
}

Index argmin_first(const VectorXd& values) {
  Index best = 0;
  for (Index i = 1; i < values.size(); ++i) {
    if (values(i) < values(best)) best = i;
  }
  return best;
}

}  // namespace

std::string_view to_string(ColumnScaling scaling) noexcept {
  return scaling == ColumnScaling::Standardize ? "standardize" : "center";
}

ColumnScaling column_scaling_from_string(std::string_view name) {
  if (name == "standardize") return ColumnScaling::Standardize;
  if (name == "center") return ColumnScaling::CenterOnly;
  throw Error(ErrorCode::InvalidArgument, "unknown column scaling '" + std::string(name) + "' (expected standardize or center)");
}

void ExtractionConfig::validate(Index n, Index m) const {
  const Index limit = std::min(n - 1, m);
  if (k_max < 0 || k_max > limit) {
    throw Error(ErrorCode::InvalidArgument,
                "k_max must lie in [0, min(n-1, m)] = [0, " + std::to_string(limit) + "]");
  }
  if (stop_rule != StopRule::FixedK && k_max < 1) {
    throw Error(ErrorCode::InvalidArgument, "CV/BIC selection needs k_max >= 1");
  }
  if (stop_rule == StopRule::CrossValidation && (cv_folds < 2 || cv_folds > n)) {
    throw Error(ErrorCode::InvalidArgument, "cross validation needs between 2 and n folds");
  }
  if (method == BasisMethod::PQR && loss.kind() != CheckLossSpec::Kind::QR) {
    throw Error(ErrorCode::InvalidArgument, "PQR extraction needs a quantile (QR) loss");
  }
  if (method == BasisMethod::PCQR && loss.kind() != CheckLossSpec::Kind::CQR) {
    throw Error(ErrorCode::InvalidArgument, "PCQR extraction needs a composite (CQR) loss");
  }
}

CheckLossSpec covariance_loss(BasisMethod method, const CheckLossSpec& requested) {
  switch (method) {
    case BasisMethod::PLS: return CheckLossSpec::least_squares();
    case BasisMethod::FPC:
    case BasisMethod::PQR:
    case BasisMethod::PCQR: return requested;
  }
  return requested;
}

ExtractionResult ExtractionResult::truncated(Index k) const {
  if (k < 0 || k > size()) throw Error(ErrorCode::InvalidArgument, "cannot truncate extraction beyond its size");
  ExtractionResult out = *this;
  out.directions.functions = directions.functions.topRows(k);
  out.deflation_intercepts = deflation_intercepts.topRows(k);
  out.deflation_slopes = deflation_slopes.topRows(k);
  out.weights = weights.topRows(k);
  out.score_offsets = score_offsets.head(k);
  out.scores.values = scores.values.leftCols(k);
  out.residual_norms.resize(static_cast<std::size_t>(std::min<Index>(k, static_cast<Index>(residual_norms.size()))));
  out.exhausted = exhausted && k == size();
  return out;
}

MatrixXd ExtractionResult::replay_scores(const MatrixXd& curves) const {
  if (curves.cols() != grid().size()) throw Error(ErrorCode::GridMismatch, "curves do not match the training grid");
  const double dt = grid().spacing();
  MatrixXd current = transform.apply(curves);
  MatrixXd out(curves.rows(), size());
  for (Index k = 0; k < size(); ++k) {
    const VectorXd score = dt * (current * directions.functions.row(k).transpose());
    out.col(k) = score;
    if (method != BasisMethod::FPC) {
      current -= VectorXd::Ones(curves.rows()) * deflation_intercepts.row(k) + score * deflation_slopes.row(k);
    }
  }
  return out;
}

MatrixXd ExtractionResult::linear_scores(const MatrixXd& curves) const {
  if (curves.cols() != grid().size()) throw Error(ErrorCode::GridMismatch, "curves do not match the training grid");
  const double dt = grid().spacing();
  MatrixXd out = dt * ((curves.rowwise() - transform.mean) * weights.transpose());
  out.rowwise() += score_offsets.transpose();
  return out;
}

Direction extract_one(const FunctionalSample& sample, const CheckLossSpec& loss, bool scalars_as_adjusters,
                      int threads, const SolverOptions& options, ColumnScaling scaling) {
  if (!sample.has_responses()) throw Error(ErrorCode::InvalidArgument, "extraction needs responses");
  const Index m = sample.grid().size();
  const MatrixXd none(sample.size(), 0);
  const MatrixXd& adjusters = scalars_as_adjusters ? sample.scalars() : none;
  const VectorXd& y = sample.responses();

  VectorXd cov(m);
  parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t j) {
    const VectorXd column = sample.curves().col(static_cast<Index>(j));
    try {
      double c = covariance(CovarianceRequest{y, column, adjusters, loss}, options);
      if (scaling == ColumnScaling::CenterOnly) {
        c *= std::sqrt((column.array() - column.mean()).square().sum() / static_cast<double>(column.size() - 1));
      }
      cov(static_cast<Index>(j)) = c;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateProbe) throw;
      cov(static_cast<Index>(j)) = 0.0;
    }
  });

  if (cov.cwiseAbs().maxCoeff() < kZeroCovariance) {
    throw Error(ErrorCode::AllZeroDirection, "every column covariance is below 1e-12");
  }
  Direction out;
  out.raw_norm = std::sqrt(sample.grid().spacing() * cov.squaredNorm());
  out.values = cov / out.raw_norm;
  return out;
}

Deflation deflate(const FunctionalSample& sample, const VectorXd& score) {
  const Index n = sample.size();
  if (score.size() != n) throw Error(ErrorCode::DimensionMismatch, "score length does not match the sample");
  const double mean = score.mean();
  const VectorXd centered = score.array() - mean;
  const double ss = centered.squaredNorm();
  if (n < 2 || ss / static_cast<double>(n - 1) < kDegenerateScoreVariance) {
    throw Error(ErrorCode::DegenerateScore, "score has (near) zero variance");
  }
  const MatrixXd& e = sample.curves();
  const RowVectorXd column_means = e.colwise().mean();
  RowVectorXd slopes = (centered.transpose() * e) / ss;
  RowVectorXd intercepts = column_means - mean * slopes;
  MatrixXd residuals = e - VectorXd::Ones(n) * intercepts - score * slopes;
  return {sample.with_curves(std::move(residuals)), std::move(intercepts), std::move(slopes)};
}

ExtractionResult run_extraction(const FunctionalSample& sample, const ExtractionConfig& config) {
  config.validate(sample.size(), sample.grid().size());
  if (config.method != BasisMethod::FPC && !sample.has_responses()) {
    throw Error(ErrorCode::InvalidArgument, "response-adapted extraction needs responses");
  }
  const Index k = config.stop_rule == StopRule::FixedK ? config.k_max : select_k(sample, config);
  if (k == 0) {
    ExtractionResult result = empty_result(sample, config.method);
    result.transform.mean = sample.curves().colwise().mean();
    result.transform.scale = RowVectorXd::Ones(sample.grid().size());
    return result;
  }
  if (config.method == BasisMethod::FPC) return run_fpc(sample, k);
  return run_sequential(sample, config, k);
}

Index select_k(const FunctionalSample& sample, const ExtractionConfig& config) {
  if (config.stop_rule == StopRule::FixedK) return config.k_max;
  config.validate(sample.size(), sample.grid().size());
  if (!sample.has_responses()) throw Error(ErrorCode::InvalidArgument, "basis-count selection needs responses");
  const CheckLossSpec model_loss = selection_loss(config);
  const Index n = sample.size();

  if (config.stop_rule == StopRule::BIC) {
    ExtractionConfig fixed = config;
    fixed.stop_rule = StopRule::FixedK;
    const ExtractionResult full = run_extraction(sample, fixed);
    VectorXd criterion = VectorXd::Constant(config.k_max, std::numeric_limits<double>::infinity());
    for (Index k = 1; k <= full.size(); ++k) {
      const ModelFit fit = fit_model(sample, full.truncated(k), model_loss, config.solver);
      const double loss = mean_loss(model_loss, fit.fitted, sample.responses());
      criterion(k - 1) = static_cast<double>(n) * std::log(std::max(loss, std::numeric_limits<double>::min())) +
                         static_cast<double>(k) * std::log(static_cast<double>(n));
    }
    if (full.size() == 0) return 1;
    return argmin_first(criterion) + 1;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(config.seed);
  std::shuffle(order.begin(), order.end(), rng);

  VectorXd total = VectorXd::Zero(config.k_max);
  for (int fold = 0; fold < config.cv_folds; ++fold) {
    std::vector<Index> train_rows;
    std::vector<Index> test_rows;
    for (std::size_t i = 0; i < order.size(); ++i) {
      (static_cast<int>(i % static_cast<std::size_t>(config.cv_folds)) == fold ? test_rows : train_rows)
          .push_back(order[i]);
    }
    const FunctionalSample train = sample.subset(train_rows);
    ExtractionConfig fold_config = config;
    fold_config.k_max = std::min(config.k_max, std::min(train.size() - 1, train.grid().size()));
    VectorXd losses = held_out_losses(train, sample.subset(test_rows), fold_config, model_loss);
    losses.conservativeResize(config.k_max);
    for (Index k = fold_config.k_max; k < config.k_max; ++k) losses(k) = losses(fold_config.k_max - 1);
    total += losses;
  }
  return argmin_first(total) + 1;
}

}  // namespace pfqr
