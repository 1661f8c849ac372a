#pragma once

#include <utility>

#include "respred/errors.hpp"
#include "respred/types.hpp"

namespace respred {

/// Block Hankel matrix of a vector-valued signal. Row block i, column j holds
/// the signal value at step i + j, so consecutive columns are windows shifted
/// by one step.
struct BlockHankel {
  Matrix data;           ///< (depth * signal_dim) x (steps - depth + 1)
  Index depth = 0;       ///< number of block rows
  Index signal_dim = 0;  ///< per-step vector dimension

  Index cols() const { return data.cols(); }
};

/// Builds the depth-block Hankel matrix of a signal given column-per-step.
/// Throws DimensionError if the signal is shorter than the requested depth.
BlockHankel build_hankel(const Matrix& signal, Index depth);

/// Recovers the signal a Hankel matrix was built from (first column plus the
/// trailing block row). Inverse of build_hankel.
Matrix reconstruct_signal(const BlockHankel& h);

/// Splits a depth-(lag + horizon) Hankel matrix into its first `lag` block
/// rows and the remaining `horizon` block rows. Both parts must be nonempty.
std::pair<Matrix, Matrix> partition_past_future(const BlockHankel& h, Index lag,
                                                Index horizon);

struct ExcitationCheck {
  bool ok = false;
  Index rank = 0;      ///< numerical rank of the depth-`order` Hankel matrix
  Index required = 0;  ///< order * signal_dim
};

/// Rank test behind is_persistently_exciting, reporting the achieved rank.
ExcitationCheck check_excitation(const Matrix& signal, Index order,
                                 double rank_tol = 1e-8);

/// True iff the depth-`order` Hankel matrix of the signal has full row rank.
/// Rank is counted from singular values at the relative threshold rank_tol.
bool is_persistently_exciting(const Matrix& signal, Index order,
                              double rank_tol = 1e-8);

/// Default relative truncation threshold: max(rows, cols) * machine epsilon.
double default_svd_tol(Index rows, Index cols);

/// Moore-Penrose pseudoinverse via SVD. Singular values below
/// svd_tol * sigma_max are truncated to zero; svd_tol < 0 selects the default.
Matrix pinv(const Matrix& m, double svd_tol = -1.0);

struct PinvResult {
  Matrix pinv;
  Index rank = 0;
};

/// Pseudoinverse plus the numerical rank from the same decomposition.
PinvResult pinv_with_rank(const Matrix& m, double svd_tol = -1.0);

/// Numerical rank at a relative singular-value threshold (rel_tol < 0 selects
/// the default).
Index numerical_rank(const Matrix& m, double rel_tol = -1.0);

}  // namespace respred
