#include "respred/residual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "respred/hankel.hpp"
#include "respred/rng.hpp"

namespace respred {

namespace {

constexpr Index kAssignmentCap = 2000;

// Min-cost perfect matching on an n x n cost matrix (potentials method).
double min_cost_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(match[static_cast<std::size_t>(j)] - 1, j - 1);
  return total;
}

Matrix subsample_columns(const Matrix& m, Index target, Rng& rng) {
  std::vector<Index> idx(static_cast<std::size_t>(m.cols()));
  std::iota(idx.begin(), idx.end(), Index{0});
  for (Index i = 0; i < target; ++i) {
    const Index j = i + static_cast<Index>(rng.integer(
                            static_cast<std::uint64_t>(m.cols() - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  Matrix out(m.rows(), target);
  for (Index i = 0; i < target; ++i) out.col(i) = m.col(idx[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

RegressorBundle build_regressor(const Matrix& exog_hist, const Matrix& out_hist,
                                Index lag) {
  if (lag < 1) throw DimensionError("build_regressor: lag must be at least 1");
  if (exog_hist.cols() != out_hist.cols()) {
    throw DimensionError("build_regressor: input and output histories differ in length");
  }
  const Index steps = exog_hist.cols() - lag;
  if (steps < 1) {
    throw DimensionError("build_regressor: history of " +
                         std::to_string(exog_hist.cols()) +
                         " samples leaves no regression steps at lag " +
                         std::to_string(lag));
  }
  RegressorBundle rb;
  rb.dims.lag = lag;
  rb.dims.n_exog = exog_hist.rows();
  rb.dims.n_out = out_hist.rows();
  rb.dims.n_init = lag * (rb.dims.n_exog + rb.dims.n_out);
  rb.dims.steps = steps;

  rb.z_seq.resize(rb.dims.n_init, steps);
  for (Index i = 0; i < lag; ++i) {
    rb.z_seq.middleRows(i * rb.dims.n_exog, rb.dims.n_exog) =
        exog_hist.middleCols(i, steps);
    rb.z_seq.middleRows(lag * rb.dims.n_exog + i * rb.dims.n_out, rb.dims.n_out) =
        out_hist.middleCols(i, steps);
  }
  rb.S.resize(rb.dims.n_init + rb.dims.n_exog, steps);
  rb.S.topRows(rb.dims.n_init) = rb.z_seq;
  rb.S.bottomRows(rb.dims.n_exog) = exog_hist.middleCols(lag, steps);
  return rb;
}

ResidualModel estimate_residuals(const RegressorBundle& rb, const Matrix& out_current,
                                 const ResidualOptions& opts) {
  const RegressorDims& d = rb.dims;
  if (out_current.rows() != d.n_out || out_current.cols() != d.steps) {
    throw DimensionError("estimate_residuals: output block is " +
                         std::to_string(out_current.rows()) + "x" +
                         std::to_string(out_current.cols()) + ", expected " +
                         std::to_string(d.n_out) + "x" + std::to_string(d.steps));
  }
  const Index n_reg = d.n_init + d.n_exog;
  if (d.steps < n_reg) {
    throw DegeneracyError("estimate_residuals: " + std::to_string(d.steps) +
                          " steps cannot determine " + std::to_string(n_reg) +
                          " regressor rows; use a longer window or smaller lag");
  }
  const PinvResult pr = pinv_with_rank(rb.S, opts.rank_tol);
  if (pr.rank < n_reg) {
    throw DegeneracyError("estimate_residuals: regressor rank " +
                          std::to_string(pr.rank) + " below " +
                          std::to_string(n_reg) +
                          "; use a longer window or smaller lag");
  }

  ResidualModel rm;
  rm.dims = d;
  rm.arx.noalias() = out_current * pr.pinv;
  rm.residuals = out_current - rm.arx * rb.S;

  // Exactly explained data: collapse the residual process to a point mass.
  const double out_scale = out_current.size() > 0
                               ? out_current.cwiseAbs().maxCoeff()
                               : 0.0;
  if (rm.residuals.cwiseAbs().maxCoeff() <= opts.degeneracy_tol * out_scale) {
    rm.residuals.setZero();
    rm.mean = Vector::Zero(d.n_out);
    rm.cov = Matrix::Zero(d.n_out, d.n_out);
    rm.cov_factor.resize(d.n_out, 0);
    rm.whitened.resize(0, d.steps);
    return rm;
  }

  rm.mean = rm.residuals.rowwise().mean();
  const Matrix centered = rm.residuals.colwise() - rm.mean;
  rm.cov.noalias() = centered * centered.transpose() / static_cast<double>(d.steps);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(rm.cov);
  const Vector& lam = eig.eigenvalues();
  const double clamp = opts.eig_clamp * rm.cov.trace();
  std::vector<Index> keep;
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > clamp && lam(i) > 0.0) keep.push_back(i);
  }
  const Index n_germ = static_cast<Index>(keep.size());
  rm.cov_factor.resize(d.n_out, n_germ);
  Matrix whitener(n_germ, d.n_out);
  for (Index j = 0; j < n_germ; ++j) {
    const Index i = keep[static_cast<std::size_t>(j)];
    const double root = std::sqrt(lam(i));
    rm.cov_factor.col(j) = eig.eigenvectors().col(i) * root;
    whitener.row(j) = eig.eigenvectors().col(i).transpose() / root;
  }
  rm.whitened.noalias() = whitener * centered;
  return rm;
}

double wasserstein2(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("wasserstein2: sample dimensions differ");
  }
  if (a.cols() != b.cols()) {
    throw DimensionError("wasserstein2: sample counts differ (" +
                         std::to_string(a.cols()) + " vs " +
                         std::to_string(b.cols()) + ")");
  }
  if (a.cols() < 1) throw DimensionError("wasserstein2: empty sample sets");

  if (a.rows() == 1) {
    std::vector<double> sa(a.data(), a.data() + a.cols());
    std::vector<double> sb(b.data(), b.data() + b.cols());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    double sq = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) {
      const double diff = sa[i] - sb[i];
      sq += diff * diff;
    }
    return std::sqrt(sq / static_cast<double>(sa.size()));
  }

  Matrix xa = a;
  Matrix xb = b;
  if (a.cols() > kAssignmentCap) {
    Rng rng(derive_seed(0x57a55e7, "wasserstein-subsample"));
    xa = subsample_columns(a, kAssignmentCap, rng);
    xb = subsample_columns(b, kAssignmentCap, rng);
  }
  const Index n = xa.cols();
  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      cost(i, j) = (xa.col(i) - xb.col(j)).squaredNorm();
    }
  }
  return std::sqrt(min_cost_assignment(cost) / static_cast<double>(n));
}

}  // namespace respred
