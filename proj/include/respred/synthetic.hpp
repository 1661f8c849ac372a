#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "respred/dataset.hpp"
#include "respred/errors.hpp"
#include "respred/types.hpp"

namespace respred {

enum class NoiseFamily { gaussian, uniform, two_point_mixture };

const char* to_string(NoiseFamily family);
NoiseFamily noise_family_from_string(const std::string& name);

/// Zero-mean disturbance description. `scale` is the per-component standard
/// deviation for every family; the two-point mixture takes the positive value
/// with probability mixture_weight, so small weights give heavy tails.
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  Vector scale;
  double mixture_weight = 0.5;

  void validate(Index n_out) const;

  /// Kurtosis of one component (scale-free).
  double kurtosis() const;
};

/// Ground-truth lagged linear model
///   y(k) = lag_coeffs * z(k) + feedthrough * exog(k) + v(k),
/// where z(k) stacks the exogenous then output samples of the previous `lag`
/// steps and v is drawn from `noise`.
struct ArxTruth {
  Matrix lag_coeffs;   ///< n_y x lag*(n_exog + n_y)
  Matrix feedthrough;  ///< n_y x n_exog
  Index lag = 1;
  Index n_u = 0;
  Index n_ws = 0;
  Index n_y = 0;
  NoiseSpec noise;
  std::uint64_t seed = 0;  ///< generation seed, 0 for hand-built systems

  Index n_exog() const { return n_u + n_ws; }
  Index n_init() const { return lag * (n_exog() + n_y); }

  /// Companion matrix of the output recursion (lag * n_y square).
  Matrix companion() const;
  double spectral_radius() const;
  void validate() const;
};

/// Ground-truth state-space model
///   x(k+1) = A x(k) + B exog(k) + E w(k)
///   y(k)   = C x(k) + D exog(k) + F w(k)
/// with unstructured disturbance w drawn from `noise`.
struct StateSpaceTruth {
  Matrix A, B, C, D, E, F;
  Index n_u = 0;
  Index n_ws = 0;
  NoiseSpec noise;
  std::uint64_t seed = 0;

  Index n_state() const { return A.rows(); }
  Index n_exog() const { return n_u + n_ws; }
  Index n_out() const { return C.rows(); }
  Index n_dist() const { return E.cols(); }

  /// Checks shape consistency, minimality (controllable and observable at
  /// the numerical rank tolerance) and Schur stability.
  void validate(double rank_tol = 1e-8) const;
};

/// Samples a stable random lagged model. Coefficient entries are uniform on
/// [-1, 1]; the output-feedback block is rescaled until the companion matrix
/// has spectral radius at most 1 - stability_margin. Deterministic per seed.
ArxTruth random_arx(Index n_u, Index n_ws, Index n_y, Index lag,
                    double stability_margin, NoiseSpec noise, std::uint64_t seed);

/// Simulation output: the generated dataset plus the disturbance realization
/// that produced it (the residual sequence for lagged models, the unstructured
/// disturbance for state-space models).
struct SimResult {
  Dataset data;
  Matrix noise;
};

/// Forward simulation from zero initial history/state. `exog` supplies one
/// column per step; channel names are u1.., ws1.., y1.. and timestamps run
/// at `sample_period` starting from zero.
SimResult simulate(const ArxTruth& sys, const Matrix& exog, std::uint64_t seed,
                   double sample_period = 1.0);
SimResult simulate(const StateSpaceTruth& sys, const Matrix& exog, std::uint64_t seed,
                   double sample_period = 1.0);

/// Smallest number of stacked output maps with full observability rank.
Index lag_of(const StateSpaceTruth& sys, double rank_tol = 1e-8);

/// i.i.d. uniform [-1, 1] input block, persistently exciting of any order
/// with probability one.
Matrix random_uniform_inputs(Index dim, Index steps, std::uint64_t seed);

using TruthSystem = std::variant<ArxTruth, StateSpaceTruth>;

/// JSON round trip for truth systems (matrices row-major, noise spec, seed).
std::string truth_to_json(const TruthSystem& truth);
TruthSystem truth_from_json(const std::string& text);
TruthSystem load_truth(const std::string& path);
void save_truth(const TruthSystem& truth, const std::string& path);

}  // namespace respred
