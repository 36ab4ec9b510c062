#pragma once

// Brute-force reference solutions for tiny check-loss problems.

#include "pfqr/qsolve.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace pfqr::oracle {

/// min over c of sum_i rho_tau(r_i - c). Some optimum sits on a data point.
inline double quantile_objective(const VectorXd& r, double tau) {
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < r.size(); ++k) {
    double total = 0.0;
    for (Index i = 0; i < r.size(); ++i) total += check_loss(r(i) - r(k), tau);
    best = std::min(best, total);
  }
  return best;
}

/// Median regression of y on (1, x): some optimal line passes through two
/// observations with distinct x, so enumerating pairs is exact.
inline double lad_point_pair(const VectorXd& x, const VectorXd& y) {
  double best = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < x.size(); ++a) {
    for (Index b = a + 1; b < x.size(); ++b) {
      if (x(a) == x(b)) continue;
      const double slope = (y(b) - y(a)) / (x(b) - x(a));
      const double icpt = y(a) - slope * x(a);
      double total = 0.0;
      for (Index i = 0; i < x.size(); ++i) total += check_loss(y(i) - icpt - slope * x(i), 0.5);
      best = std::min(best, total);
    }
  }
  return best;
}

/// Composite objective at a fixed slope, with every level's intercept exact.
inline double cqr_at_slope(const VectorXd& x, const VectorXd& y, const std::vector<double>& levels, double slope) {
  const VectorXd r = y - slope * x;
  double total = 0.0;
  for (double tau : levels) total += quantile_objective(r, tau);
  return total;
}

/// Slope scanned on a lattice; an upper bound on the true minimum.
inline double cqr_lattice(const VectorXd& x, const VectorXd& y, const std::vector<double>& levels, double lo,
                          double hi, double step) {
  double best = std::numeric_limits<double>::infinity();
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
  for (long s = 0; s <= count; ++s) best = std::min(best, cqr_at_slope(x, y, levels, lo + step * s));
  return best;
}

/// Exact: at an optimal vertex some level interpolates two observations, so
/// the shared slope is one of the pairwise slopes.
inline double cqr_pair_slopes(const VectorXd& x, const VectorXd& y, const std::vector<double>& levels) {
  double best = std::numeric_limits<double>::infinity();
  for (Index a = 0; a < x.size(); ++a) {
    for (Index b = a + 1; b < x.size(); ++b) {
      if (x(a) == x(b)) continue;
      best = std::min(best, cqr_at_slope(x, y, levels, (y(b) - y(a)) / (x(b) - x(a))));
    }
  }
  return best;
}

}  // namespace pfqr::oracle
