#pragma once

#include <array>
#include <vector>

#include "respred/errors.hpp"
#include "respred/residual.hpp"
#include "respred/types.hpp"

namespace respred {

/// One basis function of an affine chaos expansion. Term 0 of a basis is the
/// constant 1; every other term is a zero-mean, unit-variance germ tagged with
/// the time step and component it belongs to. moments[m] stores E[phi^m] for
/// m = 0..8, so products of independent terms can be evaluated offline.
struct PceTerm {
  Index step = -1;       ///< time step of the germ; -1 for external terms
  Index component = -1;  ///< component within the germ vector
  std::array<double, 9> moments{};

  static PceTerm constant();

  /// Germ with exact standard-normal moments (1, 0, 1, 0, 3, 0, 15, 0, 105).
  static PceTerm standard_gaussian(Index step, Index component);

  /// Germ with the empirical moments of a sample row.
  static PceTerm from_samples(Index step, Index component, const RowVector& samples);
};

struct PceBasis {
  std::vector<PceTerm> terms;  ///< terms[0] is the constant

  Index count() const { return static_cast<Index>(terms.size()); }

  static PceBasis deterministic();
};

/// Joint basis for a horizon of predicted outputs: the constant term followed
/// by the whitened residual germ of every future step, step-major. Germ
/// moments are the empirical moments of the model's whitened samples.
PceBasis make_prediction_basis(const ResidualModel& rm, Index horizon);

/// Coefficient layout of the affine expansion mean + factor * germ:
/// column 0 is the mean, the remaining columns are the factor columns.
Matrix affine_pce(const Vector& mean, const Matrix& factor);

/// Chaos coefficients of a predicted trajectory. Row k * n_out + i carries
/// output component i at future step k; column 0 is the mean trajectory.
struct PcePrediction {
  Matrix coeffs;  ///< (horizon * n_out) x basis.count()
  PceBasis basis;
  Index horizon = 0;
  Index n_out = 0;

  Vector mean_trajectory() const { return coeffs.col(0); }
};

/// Variance of a scalar expansion: sum over stochastic terms of c_j^2 mu2_j.
double moment2(const RowVector& coeffs, const PceBasis& basis);

/// Fourth central moment under independent zero-mean terms:
/// sum c_j^4 mu4_j + 6 sum_{i<j} c_i^2 c_j^2 mu2_i mu2_j.
double moment4(const RowVector& coeffs, const PceBasis& basis);

/// 2n-th central moment via the multinomial sum over exponent assignments,
/// dropping assignments with any exponent equal to one (zero-mean terms).
/// Supported up to 2n = 8; larger orders raise UnsupportedOrderError.
double moment2n(const RowVector& coeffs, const PceBasis& basis, int n);

}  // namespace respred
