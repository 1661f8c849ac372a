#include "respred/hankel.hpp"

#include <Eigen/SVD>
#include <limits>
#include <string>

namespace respred {

BlockHankel build_hankel(const Matrix& signal, Index depth) {
  const Index dim = signal.rows();
  const Index steps = signal.cols();
  if (depth < 1) throw DimensionError("build_hankel: depth must be positive");
  if (dim < 1) throw DimensionError("build_hankel: signal dimension must be positive");
  if (steps < depth) {
    throw DimensionError("build_hankel: depth " + std::to_string(depth) +
                         " exceeds signal length " + std::to_string(steps));
  }
  const Index cols = steps - depth + 1;
  BlockHankel h;
  h.depth = depth;
  h.signal_dim = dim;
  h.data.resize(depth * dim, cols);
  for (Index i = 0; i < depth; ++i) {
    h.data.middleRows(i * dim, dim) = signal.middleCols(i, cols);
  }
  return h;
}

Matrix reconstruct_signal(const BlockHankel& h) {
  const Index dim = h.signal_dim;
  const Index steps = h.cols() + h.depth - 1;
  Matrix signal(dim, steps);
  signal.leftCols(h.cols()) = h.data.topRows(dim);
  for (Index i = 1; i < h.depth; ++i) {
    signal.col(h.cols() - 1 + i) = h.data.block(i * dim, h.cols() - 1, dim, 1);
  }
  return signal;
}

std::pair<Matrix, Matrix> partition_past_future(const BlockHankel& h, Index lag,
                                                Index horizon) {
  if (lag < 1) throw DimensionError("partition_past_future: lag must be at least 1");
  if (horizon < 1) throw DimensionError("partition_past_future: horizon must be at least 1");
  if (h.depth != lag + horizon) {
    throw DimensionError("partition_past_future: depth " + std::to_string(h.depth) +
                         " does not equal lag + horizon = " +
                         std::to_string(lag + horizon));
  }
  Matrix past = h.data.topRows(lag * h.signal_dim);
  Matrix future = h.data.bottomRows(horizon * h.signal_dim);
  return {std::move(past), std::move(future)};
}

ExcitationCheck check_excitation(const Matrix& signal, Index order, double rank_tol) {
  if (signal.cols() < order) {
    throw DimensionError("check_excitation: signal length " +
                         std::to_string(signal.cols()) + " below order " +
                         std::to_string(order));
  }
  BlockHankel h = build_hankel(signal, order);
  ExcitationCheck out;
  out.required = order * signal.rows();
  out.rank = numerical_rank(h.data, rank_tol);
  out.ok = out.rank == out.required;
  return out;
}

bool is_persistently_exciting(const Matrix& signal, Index order, double rank_tol) {
  return check_excitation(signal, order, rank_tol).ok;
}

double default_svd_tol(Index rows, Index cols) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

PinvResult pinv_with_rank(const Matrix& m, double svd_tol) {
  PinvResult out;
  if (m.size() == 0) {
    out.pinv = Matrix::Zero(m.cols(), m.rows());
    return out;
  }
  if (!m.allFinite()) throw DomainError("pinv: matrix has non-finite entries");
  const double tol = svd_tol < 0.0 ? default_svd_tol(m.rows(), m.cols()) : svd_tol;

  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax <= 0.0) {
    out.pinv = Matrix::Zero(m.cols(), m.rows());
    return out;
  }
  const double cutoff = tol * smax;
  Vector inv = Vector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) >= cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
      ++out.rank;
    }
  }
  out.pinv.noalias() =
      svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return out;
}

Matrix pinv(const Matrix& m, double svd_tol) {
  return pinv_with_rank(m, svd_tol).pinv;
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  const double tol =
      rel_tol < 0.0 ? default_svd_tol(m.rows(), m.cols()) : rel_tol;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  if (smax <= 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) >= tol * smax) ++rank;
  }
  return rank;
}

}  // namespace respred
