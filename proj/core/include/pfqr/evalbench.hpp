#pragma once

// Monte-Carlo harness: replicates a simulation design, runs every
// (method, K) cell and reduces the coefficient-function estimates to
// Bias^2 / Var / MISE plus averaged prediction errors.

#include "pfqr/extract.hpp"
#include "pfqr/model.hpp"
#include "pfqr/simgen.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pfqr {

/// The six compared methods: basis family plus downstream loss.
enum class MethodId {
  FPC,     // fPC basis, least squares
  QRFPC,   // fPC basis, quantile regression
  CQRFPC,  // fPC basis, composite quantile regression
  PLS,     // PLS basis, least squares
  PQR,     // PQR basis, quantile regression
  PCQR,    // PCQR basis, composite quantile regression
};

std::string_view to_string(MethodId method) noexcept;
MethodId method_from_string(std::string_view name);
const std::vector<MethodId>& all_methods();
BasisMethod basis_of(MethodId method) noexcept;
/// Downstream loss; CQR methods use levels l/(cqr_levels+1).
CheckLossSpec loss_of(MethodId method, double tau, int cqr_levels);

enum class DesignKind { Sim1, Sim2 };
enum class MseMode { InSample, OutOfSample, Both };

std::string_view to_string(MseMode mode) noexcept;
MseMode mse_mode_from_string(std::string_view name);

struct MiseDecomposition {
  double bias2 = 0.0;
  double var = 0.0;
  double mise = 0.0;
};

/// Rows of gamma_hats are replications. Bias^2 = w sum_j (mean_s g_s(t_j) - g(t_j))^2,
/// Var = (w/S) sum_s sum_j (g_s(t_j) - mean_s g_s(t_j))^2, MISE = Bias^2 + Var.
/// w = 1 gives plain grid sums; w = dt gives the integrated versions.
MiseDecomposition mise_decomposition(const MatrixXd& gamma_hats, const VectorXd& gamma_true, double weight = 1.0);

/// Cells whose value exceeds this are rendered ">100".
inline constexpr double kOverflowThreshold = 100.0;

struct BenchmarkConfig {
  DesignKind design = DesignKind::Sim1;
  /// Simulation I sample sizes. Simulation II always uses every source curve.
  std::vector<Index> sample_sizes{100};
  std::vector<ErrorLaw> laws{ErrorLaw::Gaussian};
  std::vector<Sim2Case> sim2_cases{Sim2Case::I};
  std::vector<MethodId> methods = all_methods();
  std::vector<Index> ks{1, 2, 3};
  int replications = 100;
  double tau = 0.5;
  int cqr_levels = 9;
  std::uint64_t seed = 1;
  int threads = 1;
  MseMode mse_mode = MseMode::Both;
  CqrPrediction cqr_prediction = CqrPrediction::MedianLevel;
  /// Weight the MISE grid sums by dt (integrated errors) instead of 1.
  bool integrated_mise = true;
  Index sim1_grid = 201;
  /// External Simulation II source curves; a synthetic source is generated when absent.
  std::optional<FunctionalSample> sim2_source;
  Index sim2_source_size = 300;
  Index sim2_grid = 256;
  double noise_factor = 1.0;
  /// Column treatment for the PLS/PQR/PCQR extractions.
  ColumnScaling scaling = ColumnScaling::CenterOnly;
  SolverOptions solver;
  /// Optional hook seeing every successful basis extraction with its training
  /// sample. Called from worker threads, so it must be thread-safe.
  std::function<void(const FunctionalSample&, const ExtractionResult&)> on_extraction;

  /// Throws InvalidArgument.
  void validate() const;
};

struct ReportCell {
  std::string scenario;  // "sim1", "sim2-i", ..., "sim2-iv"
  MethodId method = MethodId::FPC;
  ErrorLaw law = ErrorLaw::Gaussian;
  Index n = 0;
  Index k = 0;
  double bias2 = NAN;
  double var = NAN;
  double mise = NAN;
  double mse_in = NAN;
  double mse_out = NAN;
  int completed = 0;
  int failed = 0;

  bool finite() const noexcept { return std::isfinite(bias2) && std::isfinite(var) && std::isfinite(mise); }
  bool operator==(const ReportCell& other) const;
};

struct BlockTiming {
  std::string scenario;
  ErrorLaw law = ErrorLaw::Gaussian;
  Index n = 0;
  double seconds = 0.0;
};

struct EvalReport {
  std::vector<ReportCell> cells;
  /// Wall-clock per (scenario, law, n) block. Kept apart from the cells so
  /// the cell output is reproducible byte for byte.
  std::vector<BlockTiming> timings;

  bool has_failures() const noexcept;
  const ReportCell* find(std::string_view scenario, MethodId method, ErrorLaw law, Index n, Index k) const;
};

/// Called after each finished block with (finished blocks, total blocks).
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

/// Replications run concurrently up to config.threads; each replication owns
/// the seed stream derive_seed(seed, block, replication), and reductions run
/// in replication order, so the cells do not depend on the thread count.
/// Per-cell failures are counted in ReportCell::failed and never abort the run.
EvalReport run_benchmark(const BenchmarkConfig& config, const ProgressFn& progress = {});

/// Synthetic Simulation II source used when no external curves are supplied.
Sim2Source default_sim2_source(const BenchmarkConfig& config);

}  // namespace pfqr
