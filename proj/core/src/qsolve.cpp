#include "pfqr/qsolve.hpp"

#include "pfqr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace pfqr {

namespace {

// Interior-point and MM solvers below are written against this minimal design
// interface so that the composite (CQR) problem can exploit its block
// structure instead of materializing an (nL) x (L+d) matrix.
//
//   rows(), cols()
//   fitted(beta)          -> A' beta, one entry per LP row
//   transpose_times(v)    -> A v
//   weighted_gram(w)      -> A diag(w) A'
//   row(k)                -> k-th LP row as a vector of length cols()

class DenseDesign {
 public:
  explicit DenseDesign(const MatrixXd& x) : x_(x) {}

  Index rows() const { return x_.rows(); }
  Index cols() const { return x_.cols(); }
  VectorXd fitted(const VectorXd& beta) const { return x_ * beta; }
  VectorXd transpose_times(const VectorXd& v) const { return x_.transpose() * v; }
  MatrixXd weighted_gram(const VectorXd& w) const {
    const MatrixXd scaled = x_.array().colwise() * w.array();
    return scaled.transpose() * x_;
  }
  VectorXd row(Index k) const { return x_.row(k).transpose(); }

 private:
  const MatrixXd& x_;
};

// LP row k = l * n + i is (e_l, x_i): level-specific intercept plus the
// shared slope block.
class CompositeDesign {
 public:
  CompositeDesign(const MatrixXd& x, Index levels) : x_(x), levels_(levels) {}

  Index rows() const { return x_.rows() * levels_; }
  Index cols() const { return levels_ + x_.cols(); }

  VectorXd fitted(const VectorXd& beta) const {
    const Index n = x_.rows();
    const VectorXd shared = x_ * beta.tail(x_.cols());
    VectorXd out(rows());
    for (Index l = 0; l < levels_; ++l) out.segment(l * n, n) = shared.array() + beta(l);
    return out;
  }

  VectorXd transpose_times(const VectorXd& v) const {
    const Index n = x_.rows();
    VectorXd out(cols());
    VectorXd pooled = VectorXd::Zero(n);
    for (Index l = 0; l < levels_; ++l) {
      out(l) = v.segment(l * n, n).sum();
      pooled += v.segment(l * n, n);
    }
    out.tail(x_.cols()) = x_.transpose() * pooled;
    return out;
  }

  MatrixXd weighted_gram(const VectorXd& w) const {
    const Index n = x_.rows();
    const Index d = x_.cols();
    MatrixXd g = MatrixXd::Zero(cols(), cols());
    VectorXd pooled = VectorXd::Zero(n);
    for (Index l = 0; l < levels_; ++l) {
      const auto wl = w.segment(l * n, n);
      g(l, l) = wl.sum();
      if (d > 0) {
        const VectorXd cross = x_.transpose() * wl;
        g.block(l, levels_, 1, d) = cross.transpose();
        g.block(levels_, l, d, 1) = cross;
      }
      pooled += wl;
    }
    if (d > 0) {
      const MatrixXd scaled = x_.array().colwise() * pooled.array();
      g.bottomRightCorner(d, d) = scaled.transpose() * x_;
    }
    return g;
  }

  VectorXd row(Index k) const {
    const Index n = x_.rows();
    VectorXd out = VectorXd::Zero(cols());
    out(k / n) = 1.0;
    out.tail(x_.cols()) = x_.row(k % n).transpose();
    return out;
  }

 private:
  const MatrixXd& x_;
  Index levels_;
};

double objective_of(const VectorXd& residual, const VectorXd& tau) {
  double total = 0.0;
  for (Index i = 0; i < residual.size(); ++i) total += check_loss(residual(i), tau(i));
  return total;
}

struct SolveOutcome {
  VectorXd beta;
  int iterations = 0;
  bool converged = false;
};

// Largest step in (0, 1] keeping v + a*dv > 0 and u + sign*a*du > 0, shortened
// by the usual 0.99995 safety factor.
double max_step(const VectorXd& v, const VectorXd& dv, const VectorXd& u, const VectorXd& du, double sign) {
  double step = std::numeric_limits<double>::infinity();
  const double* pv = v.data();
  const double* pdv = dv.data();
  const double* pu = u.data();
  const double* pdu = du.data();
  for (Index i = 0; i < v.size(); ++i) {
    if (pdv[i] < 0.0) step = std::min(step, -pv[i] / pdv[i]);
    const double dui = sign * pdu[i];
    if (dui < 0.0) step = std::min(step, -pu[i] / dui);
  }
  return std::min(1.0, 0.99995 * step);
}

Eigen::LDLT<MatrixXd> factor(const MatrixXd& gram) {
  Eigen::LDLT<MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) {
    const double ridge = 1e-12 * (1.0 + gram.diagonal().cwiseAbs().maxCoeff());
    ldlt.compute(gram + ridge * MatrixXd::Identity(gram.rows(), gram.cols()));
  }
  return ldlt;
}

// Primal-dual interior point (Mehrotra predictor-corrector) on the bounded
// dual of the check-loss LP:
//
//   min -y'a  s.t.  A a = A (1 - tau),  0 <= a <= 1,
//
// whose equality multipliers are -beta. Primal and dual feasibility hold from
// the start, so convergence is measured by the complementarity gap alone.
template <class Design>
SolveOutcome interior_point(const Design& design, const VectorXd& y, const VectorXd& tau,
                            const SolverOptions& options) {
  const Index rows = design.rows();
  SolveOutcome out;

  VectorXd x = (1.0 - tau.array()).matrix();
  VectorXd s = tau;
  const VectorXd c = -y;

  Eigen::LDLT<MatrixXd> ldlt = factor(design.weighted_gram(VectorXd::Ones(rows)));
  VectorXd lambda = ldlt.solve(design.transpose_times(c));
  const VectorXd r0 = c - design.fitted(lambda);
  const double shift = 0.1 * r0.cwiseAbs().mean() + 1e-10 * (1.0 + y.cwiseAbs().maxCoeff());
  VectorXd z = r0.cwiseMax(0.0).array() + shift;
  VectorXd w = (-r0).cwiseMax(0.0).array() + shift;

  VectorXd dx(rows), dy, dz(rows), dw(rows);
  VectorXd rhs(rows);
  auto direction = [&](const VectorXd& d, const VectorXd& rc, const VectorXd& rxz, const VectorXd& rsw) {
    rhs.array() = rc.array() - rxz.array() / x.array() + rsw.array() / s.array();
    dy = ldlt.solve(design.transpose_times((d.array() * rhs.array()).matrix()));
    dx.array() = d.array() * (design.fitted(dy).array() - rhs.array());
    dz.array() = (rxz.array() - z.array() * dx.array()) / x.array();
    dw.array() = (rsw.array() + w.array() * dx.array()) / s.array();
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const VectorXd fitted = design.fitted(lambda);
    double objective = 0.0;
    for (Index i = 0; i < rows; ++i) objective += check_loss(y(i) + fitted(i), tau(i));
    const double gap = x.dot(z) + s.dot(w);
    out.iterations = iter;
    if (!std::isfinite(gap) || !std::isfinite(objective)) break;
    if (gap < options.gap_tolerance * (1.0 + std::abs(objective))) {
      out.converged = true;
      break;
    }

    const VectorXd d = (z.array() / x.array() + w.array() / s.array()).inverse().matrix();
    const VectorXd rc = (c.array() - fitted.array() - z.array() + w.array()).matrix();
    ldlt = factor(design.weighted_gram(d));

    // Affine-scaling predictor.
    direction(d, rc, (-x.array() * z.array()).matrix(), (-s.array() * w.array()).matrix());
    double primal = max_step(x, dx, s, dx, -1.0);
    double dual = max_step(z, dz, w, dw, 1.0);
    const double mu_affine = ((x.array() + primal * dx.array()) * (z.array() + dual * dz.array())).sum() +
                             ((s.array() - primal * dx.array()) * (w.array() + dual * dw.array())).sum();
    const double sigma = std::pow(mu_affine / gap, 3.0);
    const double target = sigma * gap / static_cast<double>(2 * rows);

    // Centering corrector.
    const VectorXd rxz = (target - x.array() * z.array() - dx.array() * dz.array()).matrix();
    const VectorXd rsw = (target - s.array() * w.array() + dx.array() * dw.array()).matrix();
    direction(d, rc, rxz, rsw);
    primal = max_step(x, dx, s, dx, -1.0);
    dual = max_step(z, dz, w, dw, 1.0);

    x += primal * dx;
    s -= primal * dx;
    lambda += dual * dy;
    z += dual * dz;
    w += dual * dw;
    out.iterations = iter + 1;
  }
  out.beta = -lambda;
  if (!out.beta.allFinite()) out.converged = false;
  return out;
}

// Hunter-Lange majorize-minimize on the epsilon-smoothed check loss.
template <class Design>
SolveOutcome majorize_minimize(const Design& design, const VectorXd& y, const VectorXd& tau,
                               const SolverOptions& options) {
  const Index rows = design.rows();
  SolveOutcome out;
  VectorXd beta = factor(design.weighted_gram(VectorXd::Ones(rows))).solve(design.transpose_times(y));
  const double scale = std::max((y - design.fitted(beta)).cwiseAbs().mean(), 1e-12);
  const VectorXd tilt = (2.0 * tau.array() - 1.0).matrix();

  bool stage_converged = false;
  for (int exponent = 2; exponent <= 8; ++exponent) {
    const double eps = std::pow(10.0, -exponent) * scale;
    stage_converged = false;
    for (int iter = 0; iter < options.max_iterations; ++iter) {
      ++out.iterations;
      const VectorXd r = y - design.fitted(beta);
      const VectorXd weight = (eps + r.cwiseAbs().array()).inverse().matrix();
      const VectorXd rhs = design.transpose_times(weight.cwiseProduct(y) + tilt);
      const VectorXd next = factor(design.weighted_gram(weight)).solve(rhs);
      const double change = (next - beta).cwiseAbs().maxCoeff();
      beta = next;
      if (!beta.allFinite()) {
        out.beta = beta;
        return out;
      }
      if (change <= 1e-10 * (1.0 + beta.cwiseAbs().maxCoeff())) {
        stage_converged = true;
        break;
      }
    }
  }
  out.beta = beta;
  out.converged = stage_converged;
  return out;
}

struct Crossover {
  VectorXd beta;
  double objective = 0.0;
  bool vertex = false;
  bool degenerate = false;
};

// Moves an optimal interior-point solution onto an optimal vertex of the LP.
//
// Rows with (numerically) zero residual form the tight set B. While B has
// rank below p the point lies inside an optimal face, on which the objective
// is flat along null(B). We then step along the part of -beta that lies in
// null(B) (or its opposite when that lowers the objective) until another
// residual reaches zero, and add that row to B. With p independent tight rows
// the vertex is recomputed exactly from them.
template <class Design>
Crossover crossover(const Design& design, const VectorXd& y, const VectorXd& tau, const VectorXd& start) {
  const Index rows = design.rows();
  const Index p = design.cols();
  Crossover out;
  out.beta = start;
  out.objective = objective_of(y - design.fitted(start), tau);
  if (p == 0 || rows < p) return out;

  const double threshold = 1e-7 * (1.0 + y.cwiseAbs().maxCoeff());
  VectorXd beta = start;
  VectorXd residual = y - design.fitted(beta);

  std::vector<Index> order;
  for (Index i = 0; i < rows; ++i) {
    if (std::abs(residual(i)) <= threshold) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(residual(a)) < std::abs(residual(b)); });

  // Greedy independent subset of the tight rows, smallest residual first.
  std::vector<Index> basis;
  MatrixXd tight(0, p);
  auto try_add = [&](Index k) {
    MatrixXd grown(tight.rows() + 1, p);
    grown << tight, design.row(k).transpose();
    Eigen::FullPivLU<MatrixXd> lu(grown);
    lu.setThreshold(1e-10);
    if (lu.rank() > tight.rows()) {
      tight = std::move(grown);
      basis.push_back(k);
      return true;
    }
    return false;
  };
  for (Index k : order) {
    if (static_cast<Index>(basis.size()) == p) break;
    try_add(k);
  }
  const bool face = static_cast<Index>(basis.size()) < p;

  while (static_cast<Index>(basis.size()) < p) {
    std::vector<bool> in_basis(static_cast<std::size_t>(rows), false);
    for (Index k : basis) in_basis[static_cast<std::size_t>(k)] = true;

    // Orthonormal basis of null(tight).
    MatrixXd kernel;
    if (tight.rows() == 0) {
      kernel = MatrixXd::Identity(p, p);
    } else {
      Eigen::FullPivLU<MatrixXd> lu(tight);
      lu.setThreshold(1e-10);
      kernel = lu.kernel();
    }
    Eigen::HouseholderQR<MatrixXd> qr(kernel);
    const MatrixXd q = qr.householderQ() * MatrixXd::Identity(p, kernel.cols());
    VectorXd step = -(q * (q.transpose() * beta));
    if (step.norm() <= 1e-12 * (1.0 + beta.norm())) step = q.col(0);
    step /= step.norm();
    const VectorXd moved = design.fitted(step);
    const double flat = 1e-12 * (1.0 + moved.cwiseAbs().maxCoeff());

    struct Move {
      double length;
      Index hit;
      VectorXd beta;
      double objective;
    };
    std::optional<Move> best;
    for (const double sign : {1.0, -1.0}) {
      double length = std::numeric_limits<double>::infinity();
      Index hit = -1;
      for (Index i = 0; i < rows; ++i) {
        if (in_basis[static_cast<std::size_t>(i)] || std::abs(moved(i)) <= flat) continue;
        const double alpha = residual(i) / (sign * moved(i));
        if (alpha >= 0.0 && alpha < length) {
          length = alpha;
          hit = i;
        }
      }
      if (hit < 0) continue;
      VectorXd candidate = beta + sign * length * step;
      const double obj = objective_of(y - design.fitted(candidate), tau);
      const double tie = 1e-12 * (1.0 + std::abs(obj));
      if (!best || obj < best->objective - tie ||
          (std::abs(obj - best->objective) <= tie && candidate.norm() < best->beta.norm())) {
        best = Move{length, hit, std::move(candidate), obj};
      }
    }
    if (!best) return out;
    beta = best->beta;
    residual = y - design.fitted(beta);
    if (!try_add(best->hit)) return out;
  }

  VectorXd rhs(p);
  for (Index r = 0; r < p; ++r) rhs(r) = y(basis[static_cast<std::size_t>(r)]);
  Eigen::FullPivLU<MatrixXd> lu(tight);
  if (lu.rank() < p) return out;
  VectorXd vertex = lu.solve(rhs);
  if (!vertex.allFinite()) return out;
  const VectorXd vertex_residual = y - design.fitted(vertex);
  const double obj = objective_of(vertex_residual, tau);
  if (obj > out.objective + 1e-9 * (1.0 + std::abs(out.objective))) return out;

  out.beta = std::move(vertex);
  out.objective = obj;
  out.vertex = true;
  out.degenerate = face || (vertex_residual.array().abs() <= threshold).count() > p;
  return out;
}

template <class Design>
LinearFit solve_check_lp(const Design& design, const VectorXd& y, const VectorXd& tau,
                         const SolverOptions& options, bool force_mm) {
  SolveOutcome outcome;
  bool used_mm = force_mm;
  if (!force_mm) {
    outcome = interior_point(design, y, tau, options);
    if (!outcome.converged && options.mm_fallback) {
      const int ip_iterations = outcome.iterations;
      outcome = majorize_minimize(design, y, tau, options);
      outcome.iterations += ip_iterations;
      used_mm = true;
    }
  } else {
    outcome = majorize_minimize(design, y, tau, options);
  }
  if (!outcome.converged) {
    throw Error(ErrorCode::SolverDiverged,
                "check-loss solver did not converge within " + std::to_string(options.max_iterations) +
                    " iterations");
  }
  Crossover vertex = crossover(design, y, tau, outcome.beta);

  LinearFit fit;
  fit.slopes = vertex.beta;
  fit.objective = vertex.objective;
  fit.diagnostics.iterations = outcome.iterations;
  fit.diagnostics.converged = true;
  fit.diagnostics.vertex = vertex.vertex;
  fit.diagnostics.degenerate = vertex.degenerate;
  fit.diagnostics.used_mm_fallback = used_mm;
  return fit;
}

void validate_level(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream msg;
    msg << "quantile level " << tau << " is outside (0,1)";
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

void validate_problem(const MatrixXd& design, const VectorXd& y) {
  if (design.rows() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "design rows and response length differ");
  }
  if (design.rows() <= design.cols()) {
    throw Error(ErrorCode::InvalidArgument, "need more observations than design columns");
  }
  if (!design.allFinite() || !y.allFinite()) {
    throw Error(ErrorCode::NonFinite, "design or response contains non-finite values");
  }
}

void require_full_rank(const MatrixXd& design, const char* what) {
  if (design.cols() == 0) return;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw Error(ErrorCode::RankDeficientDesign, std::string(what) + " does not have full column rank");
  }
}

LinearFit fit_qr_impl(const MatrixXd& design, const VectorXd& y, double tau, const SolverOptions& options,
                      bool force_mm) {
  validate_level(tau);
  validate_problem(design, y);
  require_full_rank(design, "quantile regression design");
  const VectorXd levels = VectorXd::Constant(y.size(), tau);
  if (design.cols() == 0) {
    LinearFit fit;
    fit.slopes.resize(0);
    fit.objective = objective_of(y, levels);
    fit.diagnostics.converged = true;
    fit.diagnostics.vertex = true;
    return fit;
  }
  return solve_check_lp(DenseDesign(design), y, levels, options, force_mm);
}

}  // namespace

CheckLossSpec CheckLossSpec::quantile(double tau) {
  validate_level(tau);
  CheckLossSpec spec;
  spec.kind_ = Kind::QR;
  spec.levels_ = {tau};
  return spec;
}

CheckLossSpec CheckLossSpec::composite(std::vector<double> levels) {
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "composite loss needs at least one level");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    validate_level(levels[l]);
    if (l > 0 && !(levels[l] > levels[l - 1])) {
      throw Error(ErrorCode::InvalidArgument, "composite levels must be strictly increasing");
    }
  }
  CheckLossSpec spec;
  spec.kind_ = Kind::CQR;
  spec.levels_ = std::move(levels);
  return spec;
}

CheckLossSpec CheckLossSpec::composite_uniform(int count) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "composite loss needs at least one level");
  std::vector<double> levels(static_cast<std::size_t>(count));
  for (int l = 1; l <= count; ++l) levels[static_cast<std::size_t>(l - 1)] = l / (1.0 + count);
  return composite(std::move(levels));
}

double CheckLossSpec::tau() const noexcept {
  if (levels_.empty()) return 0.5;
  if (kind_ == Kind::QR) return levels_.front();
  return *std::min_element(levels_.begin(), levels_.end(),
                           [](double a, double b) { return std::abs(a - 0.5) < std::abs(b - 0.5); });
}

std::string CheckLossSpec::label() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::LS: return "ls";
    case Kind::QR: out << "qr(" << levels_.front() << ")"; break;
    case Kind::CQR:
      out << "cqr(";
      for (std::size_t l = 0; l < levels_.size(); ++l) out << (l ? "," : "") << levels_[l];
      out << ")";
      break;
  }
  return out.str();
}

double qr_objective(const MatrixXd& design, const VectorXd& y, const VectorXd& coef, double tau) {
  const VectorXd r = y - design * coef;
  double total = 0.0;
  for (Index i = 0; i < r.size(); ++i) total += check_loss(r(i), tau);
  return total;
}

double cqr_objective(const MatrixXd& design, const VectorXd& y, const VectorXd& intercepts,
                     const VectorXd& slopes, const std::vector<double>& levels) {
  const VectorXd base = design.cols() > 0 ? VectorXd(y - design * slopes) : y;
  double total = 0.0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const double alpha = intercepts(static_cast<Index>(l));
    for (Index i = 0; i < base.size(); ++i) total += check_loss(base(i) - alpha, levels[l]);
  }
  return total;
}

LinearFit fit_qr(const MatrixXd& design, const VectorXd& y, double tau, const SolverOptions& options) {
  return fit_qr_impl(design, y, tau, options, false);
}

LinearFit fit_qr_mm(const MatrixXd& design, const VectorXd& y, double tau, const SolverOptions& options) {
  return fit_qr_impl(design, y, tau, options, true);
}

LinearFit fit_cqr(const MatrixXd& design, const VectorXd& y, const std::vector<double>& levels,
                  const SolverOptions& options) {
  // The raw solver accepts repeated levels; CheckLossSpec is the strict type.
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "composite loss needs at least one level");
  for (std::size_t l = 0; l < levels.size(); ++l) {
    validate_level(levels[l]);
    if (l > 0 && levels[l] < levels[l - 1]) {
      throw Error(ErrorCode::InvalidArgument, "composite levels must be nondecreasing");
    }
  }
  validate_problem(design, y);
  MatrixXd augmented(design.rows(), design.cols() + 1);
  augmented << VectorXd::Ones(design.rows()), design;
  require_full_rank(augmented, "composite quantile regression design (with intercept)");

  const Index n = y.size();
  const auto count = static_cast<Index>(levels.size());
  VectorXd stacked_y(n * count);
  VectorXd stacked_tau(n * count);
  for (Index l = 0; l < count; ++l) {
    stacked_y.segment(l * n, n) = y;
    stacked_tau.segment(l * n, n).setConstant(levels[static_cast<std::size_t>(l)]);
  }
  LinearFit joint = solve_check_lp(CompositeDesign(design, count), stacked_y, stacked_tau, options, false);

  LinearFit fit;
  fit.intercepts = joint.slopes.head(count);
  fit.slopes = joint.slopes.tail(design.cols());
  fit.objective = joint.objective;
  fit.diagnostics = joint.diagnostics;
  return fit;
}

LinearFit fit_ls(const MatrixXd& design, const VectorXd& y) {
  validate_problem(design, y);
  LinearFit fit;
  fit.diagnostics.converged = true;
  if (design.cols() == 0) {
    fit.slopes.resize(0);
    fit.objective = y.squaredNorm();
    return fit;
  }
  Eigen::ColPivHouseholderQR<MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw Error(ErrorCode::RankDeficientDesign, "least-squares design does not have full column rank");
  }
  fit.slopes = qr.solve(y);
  fit.objective = (y - design * fit.slopes).squaredNorm();
  return fit;
}

}  // namespace pfqr
