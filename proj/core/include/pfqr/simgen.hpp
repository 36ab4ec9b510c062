#pragma once

// Simulation designs: Simulation I (cosine basis, known coefficient function)
// and Simulation II (coefficient functions built from empirical fPCs of a
// source curve set), plus error laws and seed derivation.

#include "pfqr/fgrid.hpp"

#include <cstdint>
#include <string_view>

namespace pfqr {

enum class ErrorLaw { Gaussian, Cauchy };

std::string_view to_string(ErrorLaw law) noexcept;
ErrorLaw error_law_from_string(std::string_view name);

/// Deterministic stream seed for (master, stream, index), built from SplitMix64
/// finalizers so neighbouring indices give unrelated streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept;

/// n i.i.d. draws: standard normal, or standard Cauchy as tan(pi (U - 1/2)).
VectorXd sample_error(ErrorLaw law, Index n, std::uint64_t seed);

/// F^{-1}(tau) of the standard law; the true tau-th conditional quantile intercept.
double error_quantile(ErrorLaw law, double tau);

/// Generated data with its ground truth.
struct SimData {
  FunctionalSample sample;
  /// True coefficient function on the grid.
  VectorXd gamma_true;
  /// dt * sum_j gamma(t_j) z_i(t_j), i.e. the responses without noise.
  VectorXd signal;
  VectorXd noise;
};

struct Sim1Design {
  Index n = 100;
  Index m = 201;
  int components = 50;
  ErrorLaw law = ErrorLaw::Gaussian;
  std::uint64_t seed = 0;
};

/// phi_j(t) = sqrt(2) cos(j pi t), rows j = 1..components.
MatrixXd sim1_basis(const Grid& grid, int components);
/// gamma_1 = 0.5, gamma_j = (20/3) (-1)^{j+1} j^{-2}.
VectorXd sim1_gamma_coefficients(int components);
/// v_j = (-1)^{j+1} j^{-0.55}.
VectorXd sim1_loadings(int components);

SimData gen_sim1(const Sim1Design& design);

enum class Sim2Case { I, II, III, IV };

std::string_view to_string(Sim2Case c) noexcept;
Sim2Case sim2_case_from_string(std::string_view name);

/// a_j = (-1)^j on the case's window (1-5, 6-10, 11-15, 16-20), zero elsewhere;
/// entries j = 1..20.
VectorXd sim2_coefficients(Sim2Case c);

/// Source curves with their leading empirical fPCs.
struct Sim2Source {
  FunctionalSample curves;
  FpcResult fpc;
};

inline constexpr Index kSim2Components = 20;

/// Computes the first 20 empirical fPCs; throws InsufficientRank when the
/// source has fewer than 20 positive eigenvalues.
Sim2Source make_sim2_source(const FunctionalSample& curves);

/// Synthetic stand-in for the source data: each curve is a smooth mean plus
/// 30 damped cosines exp(-d_k t) cos(k pi t + theta_k) with Gaussian
/// amplitudes of sd exp(-0.1 k), plus i.i.d. N(0, 0.1^2) roughness at every
/// grid point. Damping rates and phases are fixed by the seed and shared by
/// all curves.
FunctionalSample synthetic_sim2_curves(Index n, Index m, std::uint64_t seed);

struct Sim2Design {
  Sim2Case which = Sim2Case::I;
  ErrorLaw law = ErrorLaw::Gaussian;
  /// Multiplies the error scale sd(true responses) * sqrt(5).
  double noise_factor = 1.0;
  std::uint64_t seed = 0;
};

/// gamma = sum_j a_j phi_hat_j on the source grid.
VectorXd sim2_gamma(const Sim2Source& source, Sim2Case c);

/// Error scale sd(signal) * sqrt(5) * noise_factor (sample sd, denominator n-1).
double sim2_error_scale(const VectorXd& signal, double noise_factor);

/// Responses for every source curve with fresh noise drawn from `seed`.
SimData gen_sim2(const Sim2Source& source, const Sim2Design& design);

}  // namespace pfqr
