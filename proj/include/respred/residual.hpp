#pragma once

#include "respred/errors.hpp"
#include "respred/types.hpp"

namespace respred {

struct RegressorDims {
  Index lag = 0;
  Index n_exog = 0;
  Index n_out = 0;
  Index n_init = 0;  ///< lag * (n_exog + n_out)
  Index steps = 0;   ///< number of regression steps (columns)
};

/// Stacked regressor: lagged exogenous/output history on top of the current
/// exogenous sample, one column per regression step.
struct RegressorBundle {
  Matrix S;      ///< (n_init + n_exog) x steps
  Matrix z_seq;  ///< n_init x steps, lagged-history columns
  RegressorDims dims;
};

/// Assembles the regressor from aligned histories covering `steps + lag`
/// samples. Column k of z_seq stacks the exogenous samples of steps
/// [k - lag, k - 1] first, then the output samples of the same steps.
RegressorBundle build_regressor(const Matrix& exog_hist, const Matrix& out_hist,
                                Index lag);

/// Estimated residual-disturbance process and the linear model it induces.
struct ResidualModel {
  Matrix residuals;   ///< n_out x steps, least-squares residual sequence
  Matrix arx;         ///< n_out x (n_init + n_exog), lag block then feedthrough
  Vector mean;        ///< empirical residual mean
  Matrix cov;         ///< empirical residual covariance (1/steps normalization)
  Matrix cov_factor;  ///< n_out x n_germ factor with cov_factor * cov_factor^T = cov
  Matrix whitened;    ///< n_germ x steps, zero-mean unit-covariance samples
  RegressorDims dims;

  Index n_germ() const { return cov_factor.cols(); }

  /// True when the data admitted an exact linear explanation: residuals are
  /// identically zero and prediction becomes deterministic.
  bool deterministic() const { return n_germ() == 0; }
};

struct ResidualOptions {
  double rank_tol = 1e-8;         ///< relative rank threshold on the regressor
  double degeneracy_tol = 1e-10;  ///< residual-to-output ratio treated as zero
  double eig_clamp = 1e-12;       ///< covariance eigenvalues below
                                  ///< eig_clamp * trace are dropped
};

/// Least-squares residual estimate. `out_current` is the n_out x steps block
/// of outputs aligned with the regressor columns. The returned model satisfies
/// out_current = arx * S + residuals and residuals * pinv(S) * S = 0.
/// Throws DegeneracyError when the regressor is rank deficient (advice: grow
/// the window or shrink the lag).
ResidualModel estimate_residuals(const RegressorBundle& rb, const Matrix& out_current,
                                 const ResidualOptions& opts = {});

/// 2-Wasserstein distance between two equal-size empirical sample sets
/// (columns are samples). Scalar samples use the sorted coupling; higher
/// dimensions solve the exact assignment problem, subsampling both sets to
/// 2000 points with a fixed seed when larger.
double wasserstein2(const Matrix& a, const Matrix& b);

}  // namespace respred
