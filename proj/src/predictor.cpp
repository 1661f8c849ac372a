#include "respred/predictor.hpp"

#include <string>

#include "respred/hankel.hpp"

namespace respred {

namespace {

struct WindowHankels {
  Matrix past;        ///< [exogenous past; output past], n_init rows
  Matrix exog_future; ///< horizon * n_exog rows
  Matrix resid_future;///< horizon * n_out rows
  Matrix out_future;  ///< horizon * n_out rows
};

void check_model_window(const ExperimentWindow& w, const ResidualModel& rm) {
  const RegressorDims& d = rm.dims;
  if (d.lag != w.lag || d.n_exog != w.n_exog() || d.n_out != w.n_out() ||
      d.steps != w.length) {
    throw DimensionError("residual model was estimated on different dimensions "
                         "than the window");
  }
}

WindowHankels assemble_hankels(const ExperimentWindow& w, const ResidualModel& rm) {
  const Index depth = w.lag + w.horizon;
  const BlockHankel h_exog = build_hankel(w.past_exog, depth);
  const BlockHankel h_out = build_hankel(w.past_out, depth);
  const BlockHankel h_resid = build_hankel(rm.residuals, w.horizon);
  auto [exog_p, exog_f] = partition_past_future(h_exog, w.lag, w.horizon);
  auto [out_p, out_f] = partition_past_future(h_out, w.lag, w.horizon);

  WindowHankels hk;
  hk.past.resize(exog_p.rows() + out_p.rows(), exog_p.cols());
  hk.past.topRows(exog_p.rows()) = exog_p;
  hk.past.bottomRows(out_p.rows()) = out_p;
  hk.exog_future = std::move(exog_f);
  hk.resid_future = h_resid.data;
  hk.out_future = std::move(out_f);
  return hk;
}

Matrix vstack(std::initializer_list<const Matrix*> blocks) {
  Index rows = 0;
  Index cols = (*blocks.begin())->cols();
  for (const Matrix* b : blocks) rows += b->rows();
  Matrix out(rows, cols);
  Index at = 0;
  for (const Matrix* b : blocks) {
    out.middleRows(at, b->rows()) = *b;
    at += b->rows();
  }
  return out;
}

// Excitation content of the estimation data: residual directions that carry
// no variance are excluded, so exactly-explained data reduces to the
// exogenous signal alone.
Matrix excitation_signal(const ExperimentWindow& w, const ResidualModel& rm) {
  const Matrix exog_est = w.past_exog.rightCols(w.length);
  if (rm.deterministic()) return exog_est;
  const Matrix& stochastic = rm.n_germ() == rm.dims.n_out ? rm.residuals : rm.whitened;
  Matrix signal(exog_est.rows() + stochastic.rows(), w.length);
  signal.topRows(exog_est.rows()) = exog_est;
  signal.bottomRows(stochastic.rows()) = stochastic;
  return signal;
}

}  // namespace

std::pair<PredictorOperator, SubspacePredictor> build_predictors(
    const ExperimentWindow& window, const ResidualModel& rm,
    const PredictorOptions& opts) {
  check_model_window(window, rm);
  const Index horizon = window.horizon;
  const Index n_exog = window.n_exog();
  const Index n_out = window.n_out();
  const Index n_init = window.n_init();
  const Index n_germ = rm.n_germ();

  const Index cols = window.length - horizon + 1;
  const Index required_rank = n_init + horizon * (n_exog + n_germ);
  if (window.length < window.lag + horizon || cols < required_rank) {
    throw DimensionError("build_predictors: window length " +
                         std::to_string(window.length) + " gives " +
                         std::to_string(cols) + " Hankel columns, need " +
                         std::to_string(required_rank));
  }

  // Excitation check at order n_init + horizon whenever that Hankel test can
  // hold at all; the direct row-rank check below covers the remaining regime.
  const Matrix signal = excitation_signal(window, rm);
  const Index order = n_init + horizon;
  if (window.length - order + 1 >= order * signal.rows()) {
    const ExcitationCheck pe = check_excitation(signal, order, opts.rank_tol);
    if (!pe.ok) {
      throw ExcitationError("build_predictors: excitation rank " +
                            std::to_string(pe.rank) + " below required " +
                            std::to_string(pe.required));
    }
  }

  const WindowHankels hk = assemble_hankels(window, rm);
  const Matrix causal_stack = vstack({&hk.past, &hk.exog_future, &hk.resid_future});
  const PinvResult causal_pinv = pinv_with_rank(causal_stack, opts.svd_tol);
  if (causal_pinv.rank < required_rank) {
    throw ExcitationError("build_predictors: stacked data rank " +
                          std::to_string(causal_pinv.rank) + " below required " +
                          std::to_string(required_rank));
  }

  PredictorOperator op;
  op.lag = window.lag;
  op.horizon = horizon;
  op.n_exog = n_exog;
  op.n_out = n_out;
  op.n_init = n_init;
  op.fingerprint = window.fingerprint();
  op.map.noalias() = hk.out_future * causal_pinv.pinv;

  const Matrix subspace_stack = vstack({&hk.past, &hk.exog_future});
  SubspacePredictor sp;
  sp.lag = window.lag;
  sp.horizon = horizon;
  sp.n_exog = n_exog;
  sp.n_out = n_out;
  sp.n_init = n_init;
  sp.map.noalias() = hk.out_future * pinv(subspace_stack, opts.svd_tol);

  return {std::move(op), std::move(sp)};
}

PcePrediction predict_causal(const PredictorOperator& op, const Vector& init_cond,
                             const Vector& future_exog, const ResidualModel& rm) {
  Matrix zu(op.n_init + op.horizon * op.n_exog, 1);
  if (init_cond.size() != op.n_init || future_exog.size() != op.horizon * op.n_exog) {
    throw DimensionError("predict_causal: right-hand side dimensions do not match "
                         "the operator");
  }
  zu.col(0).head(op.n_init) = init_cond;
  zu.col(0).tail(op.horizon * op.n_exog) = future_exog;
  return predict_causal(op, zu, {}, rm);
}

PcePrediction predict_causal(const PredictorOperator& op, const Matrix& zu_coeffs,
                             const std::vector<PceTerm>& zu_terms,
                             const ResidualModel& rm) {
  const Index n_det = op.n_init + op.horizon * op.n_exog;
  if (zu_coeffs.rows() != n_det) {
    throw DimensionError("predict_causal: coefficient block has " +
                         std::to_string(zu_coeffs.rows()) + " rows, expected " +
                         std::to_string(n_det));
  }
  if (zu_coeffs.cols() != 1 + static_cast<Index>(zu_terms.size())) {
    throw DimensionError("predict_causal: coefficient columns do not match the "
                         "supplied basis terms");
  }
  if (rm.dims.n_out != op.n_out) {
    throw DimensionError("predict_causal: residual model does not match the operator");
  }
  const Index n_germ = rm.n_germ();
  const Index n_ext = static_cast<Index>(zu_terms.size());

  PcePrediction pred;
  pred.horizon = op.horizon;
  pred.n_out = op.n_out;
  pred.basis.terms.reserve(static_cast<std::size_t>(1 + n_ext + op.horizon * n_germ));
  pred.basis.terms.push_back(PceTerm::constant());
  for (const PceTerm& t : zu_terms) pred.basis.terms.push_back(t);
  if (n_germ > 0) {
    const PceBasis germ_basis = make_prediction_basis(rm, op.horizon);
    pred.basis.terms.insert(pred.basis.terms.end(), germ_basis.terms.begin() + 1,
                            germ_basis.terms.end());
  }

  pred.coeffs.resize(op.horizon * op.n_out, pred.basis.count());

  // Mean column: deterministic part plus the residual held at its mean.
  Vector mean_rhs(op.map.cols());
  mean_rhs.head(n_det) = zu_coeffs.col(0);
  for (Index k = 0; k < op.horizon; ++k) {
    mean_rhs.segment(n_det + k * op.n_out, op.n_out) = rm.mean;
  }
  pred.coeffs.col(0).noalias() = op.map * mean_rhs;

  // External terms act through the deterministic columns only.
  for (Index j = 0; j < n_ext; ++j) {
    pred.coeffs.col(1 + j).noalias() = op.map.leftCols(n_det) * zu_coeffs.col(1 + j);
  }

  // One germ group per future step: residual block times the covariance factor.
  if (n_germ > 0) {
    for (Index k = 0; k < op.horizon; ++k) {
      pred.coeffs.middleCols(1 + n_ext + k * n_germ, n_germ).noalias() =
          op.residual_block().middleCols(k * op.n_out, op.n_out) * rm.cov_factor;
    }
  }
  return pred;
}

Vector predict_subspace(const SubspacePredictor& sp, const Vector& init_cond,
                        const Vector& future_exog) {
  if (init_cond.size() != sp.n_init ||
      future_exog.size() != sp.horizon * sp.n_exog) {
    throw DimensionError("predict_subspace: right-hand side dimensions do not "
                         "match the operator");
  }
  Vector rhs(sp.map.cols());
  rhs.head(sp.n_init) = init_cond;
  rhs.tail(sp.horizon * sp.n_exog) = future_exog;
  return sp.map * rhs;
}

bool check_behavior_membership(const ExperimentWindow& window, const ResidualModel& rm,
                               const Vector& init_cond, const Vector& future_exog,
                               const Vector& future_residual, const Vector& future_out,
                               double tol) {
  check_model_window(window, rm);
  const WindowHankels hk = assemble_hankels(window, rm);
  const Matrix stack =
      vstack({&hk.past, &hk.exog_future, &hk.resid_future, &hk.out_future});
  if (init_cond.size() + future_exog.size() + future_residual.size() +
          future_out.size() !=
      stack.rows()) {
    throw DimensionError("check_behavior_membership: right-hand side does not "
                         "match the stacked Hankel rows");
  }
  Vector rhs(stack.rows());
  Index at = 0;
  for (const Vector* part : {&init_cond, &future_exog, &future_residual, &future_out}) {
    rhs.segment(at, part->size()) = *part;
    at += part->size();
  }
  Eigen::BDCSVD<Matrix> svd(stack, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector g = svd.solve(rhs);
  const double residual = (stack * g - rhs).norm();
  return residual <= tol * rhs.norm();
}

}  // namespace respred
