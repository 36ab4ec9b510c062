#pragma once

// Check-loss optimization on small dense designs: linear quantile regression,
// composite quantile regression and ordinary least squares.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace pfqr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Loss selector: least squares, quantile loss at one level, or the composite
/// quantile loss over strictly increasing levels in (0,1).
class CheckLossSpec {
 public:
  enum class Kind { LS, QR, CQR };

  CheckLossSpec() = default;  // least squares

  static CheckLossSpec least_squares() { return {}; }
  static CheckLossSpec quantile(double tau);
  static CheckLossSpec composite(std::vector<double> levels);
  /// Levels l/(L+1), l = 1..L.
  static CheckLossSpec composite_uniform(int count);

  Kind kind() const noexcept { return kind_; }
  /// QR: the level. CQR: the level closest to 0.5. LS: 0.5.
  double tau() const noexcept;
  /// QR: {tau}. CQR: all levels. LS: empty.
  const std::vector<double>& levels() const noexcept { return levels_; }

  /// "ls", "qr(0.5)", "cqr(0.1,...,0.9)".
  std::string label() const;

  bool operator==(const CheckLossSpec& other) const = default;

 private:
  Kind kind_ = Kind::LS;
  std::vector<double> levels_;
};

/// rho_tau(u) = u * (tau - 1[u < 0]).
inline double check_loss(double u, double tau) noexcept { return u * (tau - (u < 0.0 ? 1.0 : 0.0)); }

struct SolverOptions {
  int max_iterations = 500;
  /// Interior point stops once the duality gap drops below tol * (1 + |objective|).
  double gap_tolerance = 1e-8;
  /// Retry with the smoothed majorize-minimize solver when the interior point
  /// method does not converge.
  bool mm_fallback = true;
};

struct SolverDiagnostics {
  int iterations = 0;
  bool converged = false;
  /// The solution is a vertex of the LP (p zero residuals, exactly solved).
  bool vertex = false;
  /// More than p zero residuals, or several optimal vertices were found.
  bool degenerate = false;
  bool used_mm_fallback = false;
};

/// Result of fit_qr / fit_cqr / fit_ls.
///
/// For fit_qr and fit_ls `intercepts` is empty and `slopes` holds one
/// coefficient per design column (the design carries its own intercept column
/// when one is wanted). For fit_cqr `intercepts` holds one value per level and
/// `slopes` the shared slope vector.
struct LinearFit {
  VectorXd intercepts;
  VectorXd slopes;
  double objective = 0.0;
  SolverDiagnostics diagnostics;
};

double qr_objective(const MatrixXd& design, const VectorXd& y, const VectorXd& coef, double tau);
double cqr_objective(const MatrixXd& design, const VectorXd& y, const VectorXd& intercepts,
                     const VectorXd& slopes, const std::vector<double>& levels);

/// Minimizes sum_i rho_tau(y_i - design_i . coef). Primal-dual interior point
/// on the LP form, followed by a crossover to the optimal vertex; ties between
/// optimal vertices go to the smallest Euclidean norm.
/// Throws RankDeficientDesign, SolverDiverged, InvalidArgument.
LinearFit fit_qr(const MatrixXd& design, const VectorXd& y, double tau, const SolverOptions& options = {});

/// Minimizes sum_l sum_i rho_{tau_l}(y_i - alpha_l - design_i . slopes) jointly
/// as a single LP. The design must not contain an intercept column.
LinearFit fit_cqr(const MatrixXd& design, const VectorXd& y, const std::vector<double>& levels,
                  const SolverOptions& options = {});

/// Ordinary least squares through a column-pivoted Householder QR. Objective
/// is the residual sum of squares.
LinearFit fit_ls(const MatrixXd& design, const VectorXd& y);

/// Majorize-minimize solver on the smoothed check loss (epsilon annealed from
/// 1e-2 to 1e-8), followed by the same vertex crossover as fit_qr. Exposed for
/// testing; fit_qr falls back to it on its own.
LinearFit fit_qr_mm(const MatrixXd& design, const VectorXd& y, double tau, const SolverOptions& options = {});

}  // namespace pfqr
