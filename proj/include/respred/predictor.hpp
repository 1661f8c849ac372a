#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "respred/dataset.hpp"
#include "respred/errors.hpp"
#include "respred/pce.hpp"
#include "respred/residual.hpp"
#include "respred/types.hpp"

namespace respred {

/// Closed-form causal predictor. `map` sends the stacked right-hand side
/// [initial condition; future exogenous; future residual] to the stacked
/// future output, and its column blocks have exactly those widths. Blocks
/// mapping step-j exogenous/residual inputs to step-k outputs vanish for
/// j > k, so the operator is causal.
struct PredictorOperator {
  Matrix map;  ///< (horizon*n_out) x (n_init + horizon*n_exog + horizon*n_out)
  Index lag = 0;
  Index horizon = 0;
  Index n_exog = 0;
  Index n_out = 0;
  Index n_init = 0;
  std::uint64_t fingerprint = 0;  ///< hash of the window the operator came from

  auto init_block() const { return map.leftCols(n_init); }
  auto exog_block() const { return map.middleCols(n_init, horizon * n_exog); }
  auto residual_block() const { return map.rightCols(horizon * n_out); }
};

/// Least-norm trajectory predictor without residual channels. Deterministic,
/// and in general acausal on noisy data.
struct SubspacePredictor {
  Matrix map;  ///< (horizon*n_out) x (n_init + horizon*n_exog)
  Index lag = 0;
  Index horizon = 0;
  Index n_exog = 0;
  Index n_out = 0;
  Index n_init = 0;

  auto init_block() const { return map.leftCols(n_init); }
  auto exog_block() const { return map.rightCols(horizon * n_exog); }
};

struct PredictorOptions {
  double svd_tol = -1.0;  ///< pseudoinverse truncation; < 0 selects the default
  double rank_tol = 1e-8; ///< excitation / row-rank threshold
};

/// Builds both predictors from a window and its residual model.
///
/// Excitation is verified a posteriori: the combined exogenous/residual
/// signal must be persistently exciting of order n_init + horizon whenever
/// the window is long enough for that Hankel test to be satisfiable, and the
/// stacked data matrix must reach its required row rank in every case.
/// Degenerate residual directions are excluded from both requirements.
/// Throws ExcitationError (naming the deficient rank) or DimensionError
/// (window too short).
std::pair<PredictorOperator, SubspacePredictor> build_predictors(
    const ExperimentWindow& window, const ResidualModel& rm,
    const PredictorOptions& opts = {});

/// Applies the causal predictor to a deterministic initial condition and
/// future exogenous block. The result's column 0 is the mean trajectory
/// (residuals at their empirical mean); the stochastic columns carry the
/// whitened residual germ of each future step.
PcePrediction predict_causal(const PredictorOperator& op, const Vector& init_cond,
                             const Vector& future_exog, const ResidualModel& rm);

/// Variant with a stochastic initial condition / exogenous future: `zu_coeffs`
/// holds chaos coefficients of the stacked [initial condition; future
/// exogenous] vector in the basis {1} followed by `zu_terms`. The output basis
/// concatenates those terms with the residual germs.
PcePrediction predict_causal(const PredictorOperator& op, const Matrix& zu_coeffs,
                             const std::vector<PceTerm>& zu_terms,
                             const ResidualModel& rm);

/// Deterministic subspace prediction of the stacked future output.
Vector predict_subspace(const SubspacePredictor& sp, const Vector& init_cond,
                        const Vector& future_exog);

/// True iff some combination of the window's Hankel columns reproduces the
/// quadruple (initial condition, future exogenous, future residual, future
/// output) with relative residual at most tol.
bool check_behavior_membership(const ExperimentWindow& window, const ResidualModel& rm,
                               const Vector& init_cond, const Vector& future_exog,
                               const Vector& future_residual, const Vector& future_out,
                               double tol = 1e-8);

}  // namespace respred
