#include <doctest.h>

#include <cmath>

#include "respred/hankel.hpp"
#include "respred/pce.hpp"
#include "respred/predictor.hpp"
#include "respred/residual.hpp"
#include "respred/rng.hpp"
#include "respred/synthetic.hpp"

using namespace respred;

namespace {

struct Setup {
  ArxTruth sys;
  SimResult sim;
  ExperimentWindow window;
  ResidualModel model;
};

// Forward recursion oracle, independent of the operator algebra.
Matrix rollout(const Matrix& lag_coeffs, const Matrix& feedthrough, Index lag,
               const Vector& init, const Matrix& future_exog, const Matrix& noise) {
  const Index ne = future_exog.rows();
  const Index ny = feedthrough.rows();
  const Index horizon = future_exog.cols();
  Matrix exog_hist(ne, lag + horizon);
  Matrix out_hist(ny, lag + horizon);
  for (Index i = 0; i < lag; ++i) {
    exog_hist.col(i) = init.segment(i * ne, ne);
    out_hist.col(i) = init.segment(lag * ne + i * ny, ny);
  }
  exog_hist.rightCols(horizon) = future_exog;
  for (Index k = 0; k < horizon; ++k) {
    Vector z(lag * (ne + ny));
    for (Index i = 0; i < lag; ++i) {
      z.segment(i * ne, ne) = exog_hist.col(k + i);
      z.segment(lag * ne + i * ny, ny) = out_hist.col(k + i);
    }
    out_hist.col(lag + k) = lag_coeffs * z + feedthrough * future_exog.col(k) + noise.col(k);
  }
  return out_hist.rightCols(horizon);
}

Setup make_setup(std::uint64_t seed, double sigma, Index n_y = 1, Index n_u = 1,
                 Index lag = 2, Index T = 300, Index N = 6) {
  Setup s;
  NoiseSpec noise{NoiseFamily::gaussian, Vector::Constant(n_y, sigma), 0.5};
  s.sys = random_arx(n_u, 0, n_y, lag, 0.3, noise, seed);
  const Matrix inputs =
      random_uniform_inputs(s.sys.n_exog(), T + lag + N, derive_seed(seed, "in"));
  s.sim = simulate(s.sys, inputs, seed);
  s.window = make_window(s.sim.data, T + lag, T, lag, N);
  const RegressorBundle rb = build_regressor(s.window.past_exog, s.window.past_out, lag);
  s.model = estimate_residuals(rb, s.window.past_out.rightCols(T));
  return s;
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

}  // namespace

TEST_SUITE("predictor") {

TEST_CASE("noise-free windows reproduce the exact future") {
  Setup s = make_setup(21, 0.0, 2, 2, 2, 150, 5);
  REQUIRE(s.model.deterministic());
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);
  const Vector truth = flatten(s.window.future_truth);
  const double scale = truth.norm();

  const PcePrediction pred = predict_causal(op, s.window.init_cond, exog_f, s.model);
  CHECK(pred.basis.count() == 1);
  CHECK((pred.coeffs.col(0) - truth).norm() <= 1e-6 * scale);
  CHECK((predict_subspace(sp, s.window.init_cond, exog_f) - truth).norm() <=
        1e-6 * scale);
}

TEST_CASE("operator application equals the estimated-model rollout") {
  Setup s = make_setup(33, 0.4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);

  Rng rng(5);
  Matrix v_f(1, s.window.horizon);
  for (Index k = 0; k < s.window.horizon; ++k) v_f(0, k) = rng.gaussian() * 0.3;

  Vector rhs(op.map.cols());
  rhs << s.window.init_cond, exog_f, flatten(v_f);
  const Vector via_operator = op.map * rhs;
  const Matrix arx_lag = s.model.arx.leftCols(s.model.dims.n_init);
  const Matrix arx_feed = s.model.arx.rightCols(s.model.dims.n_exog);
  const Vector via_rollout = flatten(
      rollout(arx_lag, arx_feed, s.window.lag, s.window.init_cond,
              s.window.future_exog, v_f));
  CHECK((via_operator - via_rollout).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("mean column is the rollout at the empirical residual mean") {
  Setup s = make_setup(34, 0.4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);
  const PcePrediction pred = predict_causal(op, s.window.init_cond, exog_f, s.model);

  Matrix mean_noise(1, s.window.horizon);
  mean_noise.row(0).setConstant(s.model.mean(0));
  const Vector oracle = flatten(
      rollout(s.model.arx.leftCols(s.model.dims.n_init),
              s.model.arx.rightCols(s.model.dims.n_exog), s.window.lag,
              s.window.init_cond, s.window.future_exog, mean_noise));
  CHECK((pred.coeffs.col(0) - oracle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("causality of the operator and acausality of the subspace map") {
  Setup s = make_setup(35, 0.4, 1, 1, 2, 400, 8);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Index N = s.window.horizon;
  const Index ny = s.window.n_out();
  const double map_scale = op.map.norm();

  for (Index j = 1; j < N; ++j) {
    for (Index k = 0; k < j; ++k) {
      CHECK(op.exog_block().block(k * ny, j * s.window.n_exog(), ny,
                                  s.window.n_exog()).norm() <= 1e-8 * map_scale);
      CHECK(op.residual_block().block(k * ny, j * ny, ny, ny).norm() <=
            1e-8 * map_scale);
    }
  }
  double future_block_norm = 0.0;
  for (Index j = 1; j < N; ++j) {
    for (Index k = 0; k < j; ++k) {
      future_block_norm += sp.exog_block()
                               .block(k * ny, j * s.window.n_exog(), ny,
                                      s.window.n_exog())
                               .squaredNorm();
    }
  }
  CHECK(std::sqrt(future_block_norm) > 1e-3 * sp.map.norm());
}

TEST_CASE("perturbing a future input leaves earlier coefficients untouched") {
  Setup s = make_setup(36, 0.3);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);
  const PcePrediction base = predict_causal(op, s.window.init_cond, exog_f, s.model);

  const Index j = s.window.horizon - 2;
  Vector bumped = exog_f;
  bumped(j * s.window.n_exog()) += 2.0;
  const PcePrediction moved = predict_causal(op, s.window.init_cond, bumped, s.model);
  const Index rows_before = j * s.window.n_out();
  CHECK((moved.coeffs.topRows(rows_before) - base.coeffs.topRows(rows_before))
            .cwiseAbs()
            .maxCoeff() <= 1e-10);
  CHECK((moved.coeffs.col(0).tail(base.coeffs.rows() - rows_before) -
         base.coeffs.col(0).tail(base.coeffs.rows() - rows_before))
            .cwiseAbs()
            .maxCoeff() > 1e-6);
}

TEST_CASE("first-step variance matches the covariance propagation") {
  Setup s = make_setup(37, 0.5, 2, 1, 1, 500, 4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);
  const PcePrediction pred = predict_causal(op, s.window.init_cond, exog_f, s.model);
  const Index ny = s.window.n_out();

  const Matrix v0 = op.residual_block().topLeftCorner(ny, ny);
  const Matrix step0_cov = v0 * s.model.cov * v0.transpose();
  CHECK(moment2(pred.coeffs.row(0), pred.basis) ==
        doctest::Approx(step0_cov(0, 0)).epsilon(1e-9));

  // full-horizon check against block-diagonal covariance propagation
  Matrix blk = Matrix::Zero(op.map.cols() - op.n_init - op.horizon * op.n_exog,
                            op.map.cols() - op.n_init - op.horizon * op.n_exog);
  for (Index k = 0; k < op.horizon; ++k) {
    blk.block(k * ny, k * ny, ny, ny) = s.model.cov;
  }
  const Matrix full = op.residual_block() * blk * op.residual_block().transpose();
  for (Index r = 0; r < pred.coeffs.rows(); ++r) {
    CHECK(moment2(pred.coeffs.row(r), pred.basis) ==
          doctest::Approx(full(r, r)).epsilon(1e-9));
  }
}

TEST_CASE("analytic moments agree with sampled rollouts") {
  Setup s = make_setup(45, 0.5, 1, 1, 2, 1500, 3);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);
  const PcePrediction pred = predict_causal(op, s.window.init_cond, exog_f, s.model);

  const Index draws = 100000;
  Rng pick(derive_seed(45, "mc"));
  Matrix sampled(pred.coeffs.rows(), draws);
  for (Index m = 0; m < draws; ++m) {
    Vector traj = pred.coeffs.col(0);
    for (Index k = 0; k < s.window.horizon; ++k) {
      const Index col = static_cast<Index>(
          pick.integer(static_cast<std::uint64_t>(s.model.whitened.cols())));
      traj += pred.coeffs.col(1 + k) * s.model.whitened(0, col);
    }
    sampled.col(m) = traj;
  }
  for (Index r = 0; r < pred.coeffs.rows(); ++r) {
    const double mu2 = moment2(pred.coeffs.row(r), pred.basis);
    const double mu4 = moment4(pred.coeffs.row(r), pred.basis);
    const double mean = sampled.row(r).mean();
    const auto centered = sampled.row(r).array() - mean;
    const double s2 = centered.square().mean();
    const double s4 = centered.square().square().mean();
    CHECK(s2 == doctest::Approx(mu2).epsilon(0.05));
    CHECK(s4 / (s2 * s2) == doctest::Approx(mu4 / (mu2 * mu2)).epsilon(0.10));
  }
}

TEST_CASE("prediction is linear in the window data") {
  Setup s = make_setup(38, 0.4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  Rng rng(71);
  Vector z1(s.window.n_init()), z2(s.window.n_init());
  Vector u1(s.window.horizon * s.window.n_exog()), u2(u1.size());
  for (Index i = 0; i < z1.size(); ++i) {
    z1(i) = rng.uniform(-1, 1);
    z2(i) = rng.uniform(-1, 1);
  }
  for (Index i = 0; i < u1.size(); ++i) {
    u1(i) = rng.uniform(-1, 1);
    u2(i) = rng.uniform(-1, 1);
  }
  const Matrix sum_pred =
      predict_causal(op, z1 + z2, u1 + u2, s.model).coeffs +
      predict_causal(op, Vector::Zero(z1.size()), Vector::Zero(u1.size()), s.model)
          .coeffs;
  const Matrix split_pred = predict_causal(op, z1, u1, s.model).coeffs +
                            predict_causal(op, z2, u2, s.model).coeffs;
  CHECK((sum_pred - split_pred).cwiseAbs().maxCoeff() <= 1e-10);

  const Vector sp_zero =
      predict_subspace(sp, Vector::Zero(z1.size()), Vector::Zero(u1.size()));
  CHECK(sp_zero.cwiseAbs().maxCoeff() <= 1e-12);
  const Vector sp_sum = predict_subspace(sp, z1 + z2, u1 + u2) + sp_zero;
  const Vector sp_split = predict_subspace(sp, z1, u1) + predict_subspace(sp, z2, u2);
  CHECK((sp_sum - sp_split).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("stochastic initial conditions concatenate bases") {
  Setup s = make_setup(39, 0.4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Index n_det = op.n_init + op.horizon * op.n_exog;

  Rng rng(9);
  Matrix zu(n_det, 2);
  zu.col(0).head(op.n_init) = s.window.init_cond;
  zu.col(0).tail(op.horizon * op.n_exog) = flatten(s.window.future_exog);
  for (Index i = 0; i < n_det; ++i) zu(i, 1) = rng.uniform(-0.5, 0.5);

  const PcePrediction pred =
      predict_causal(op, zu, {PceTerm::standard_gaussian(-1, 0)}, s.model);
  CHECK(pred.basis.count() == 2 + s.window.horizon * s.model.n_germ());
  CHECK((pred.coeffs.col(1) - op.map.leftCols(n_det) * zu.col(1)).cwiseAbs().maxCoeff() <=
        1e-12);
  // deterministic variant appears as the first column and the germ columns
  const PcePrediction det =
      predict_causal(op, s.window.init_cond, flatten(s.window.future_exog), s.model);
  CHECK((pred.coeffs.col(0) - det.coeffs.col(0)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((pred.coeffs.rightCols(pred.basis.count() - 2) -
         det.coeffs.rightCols(det.basis.count() - 1))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);
}

TEST_CASE("behavior membership accepts predictions and rejects perturbations") {
  Setup s = make_setup(40, 0.4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);

  Rng rng(12);
  Vector v_f(s.window.horizon);
  for (Index k = 0; k < v_f.size(); ++k) {
    const Index col = static_cast<Index>(
        rng.integer(static_cast<std::uint64_t>(s.model.residuals.cols())));
    v_f(k) = s.model.residuals(0, col);
  }
  Vector rhs(op.map.cols());
  rhs << s.window.init_cond, exog_f, v_f;
  const Vector out_f = op.map * rhs;
  CHECK(check_behavior_membership(s.window, s.model, s.window.init_cond, exog_f, v_f,
                                  out_f));
  Vector bad = out_f;
  bad(1) += 1.0;
  CHECK_FALSE(check_behavior_membership(s.window, s.model, s.window.init_cond, exog_f,
                                        v_f, bad));

  SUBCASE("noise-free truth is a member at zero residual") {
    Setup clean = make_setup(41, 0.0, 1, 1, 2, 150, 5);
    CHECK(check_behavior_membership(clean.window, clean.model, clean.window.init_cond,
                                    flatten(clean.window.future_exog),
                                    Vector::Zero(clean.window.horizon),
                                    flatten(clean.window.future_truth)));
  }
}

TEST_CASE("the consistent future output is unique across solution choices") {
  Setup s = make_setup(42, 0.4);
  const auto [op, sp] = build_predictors(s.window, s.model);
  const Vector exog_f = flatten(s.window.future_exog);

  const Index depth = s.window.lag + s.window.horizon;
  const BlockHankel h_exog = build_hankel(s.window.past_exog, depth);
  const BlockHankel h_out = build_hankel(s.window.past_out, depth);
  const auto [exog_p, exog_fut] = partition_past_future(h_exog, s.window.lag,
                                                        s.window.horizon);
  const auto [out_p, out_fut] = partition_past_future(h_out, s.window.lag,
                                                      s.window.horizon);
  const BlockHankel h_resid = build_hankel(s.model.residuals, s.window.horizon);

  Matrix stack(exog_p.rows() + out_p.rows() + exog_fut.rows() + h_resid.data.rows(),
               exog_p.cols());
  stack << exog_p, out_p, exog_fut, h_resid.data;

  Vector rhs(stack.rows());
  rhs << s.window.init_cond, exog_f, Vector::Zero(s.window.horizon);
  const Matrix stack_pinv = pinv(stack);
  const Vector g = stack_pinv * rhs;
  REQUIRE((stack * g - rhs).norm() <= 1e-8 * rhs.norm());

  Rng rng(3);
  Vector w(g.size());
  for (Index i = 0; i < w.size(); ++i) w(i) = rng.uniform(-1, 1);
  const Vector g_shifted = g + (w - stack_pinv * (stack * w));  // same fit, other G
  CHECK((stack * g_shifted - rhs).norm() <= 1e-7 * rhs.norm());
  CHECK((out_fut * g - out_fut * g_shifted).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("excitation failures are reported") {
  const Index T = 60, lag = 1, N = 2;
  ArxTruth sys;
  sys.lag = lag;
  sys.n_u = 1;
  sys.n_ws = 0;
  sys.n_y = 1;
  sys.lag_coeffs.resize(1, 2);
  sys.lag_coeffs << 0.1, 0.5;
  sys.feedthrough = Matrix::Constant(1, 1, 1.0);
  sys.noise = {NoiseFamily::gaussian, Vector::Constant(1, 0.2), 0.5};

  const SimResult sim = simulate(sys, Matrix::Ones(1, T + lag + N), 1);
  const ExperimentWindow window = make_window(sim.data, T + lag, T, lag, N);
  const RegressorBundle rb = build_regressor(window.past_exog, window.past_out, lag);
  // constant input: the regressor itself is already rank deficient
  CHECK_THROWS_AS(estimate_residuals(rb, window.past_out.rightCols(T)),
                  DegeneracyError);

  SUBCASE("window too short for the horizon") {
    Setup s = make_setup(44, 0.3, 1, 1, 2, 300, 6);
    ExperimentWindow shrunk = make_window(s.sim.data, 300 + 2, 12, 2, 6);
    const RegressorBundle rb2 =
        build_regressor(shrunk.past_exog, shrunk.past_out, 2);
    const ResidualModel rm2 = estimate_residuals(rb2, shrunk.past_out.rightCols(12));
    CHECK_THROWS_AS(build_predictors(shrunk, rm2), DimensionError);
  }
}

}  // TEST_SUITE
