#pragma once

#include "pfqr/fgrid.hpp"

#include <cstdint>
#include <random>

namespace pfqr::testing {

inline MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd out(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

inline VectorXd random_vector(Index n, std::uint64_t seed) { return random_matrix(n, 1, seed).col(0); }

inline MatrixXd with_intercept(const MatrixXd& x) {
  MatrixXd out(x.rows(), x.cols() + 1);
  out << VectorXd::Ones(x.rows()), x;
  return out;
}

}  // namespace pfqr::testing
