#include "respred/pce.hpp"

#include <cmath>
#include <string>

namespace respred {

namespace {

constexpr int kMaxMomentOrder = 8;

const double kFactorial[kMaxMomentOrder + 1] = {1,    1,    2,     6,    24,
                                                120,  720,  5040,  40320};

void check_row(const RowVector& coeffs, const PceBasis& basis) {
  if (coeffs.size() != basis.count()) {
    throw DimensionError("coefficient row has " + std::to_string(coeffs.size()) +
                         " entries, basis has " + std::to_string(basis.count()));
  }
  if (basis.count() < 1) throw DimensionError("basis has no constant term");
}

}  // namespace

PceTerm PceTerm::constant() {
  PceTerm t;
  t.moments.fill(1.0);
  return t;
}

PceTerm PceTerm::standard_gaussian(Index step, Index component) {
  PceTerm t;
  t.step = step;
  t.component = component;
  t.moments = {1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0};
  return t;
}

PceTerm PceTerm::from_samples(Index step, Index component, const RowVector& samples) {
  if (samples.size() < 1) throw DimensionError("PceTerm: empty sample row");
  PceTerm t;
  t.step = step;
  t.component = component;
  t.moments[0] = 1.0;
  const double n = static_cast<double>(samples.size());
  RowVector power = RowVector::Ones(samples.size());
  for (int m = 1; m <= kMaxMomentOrder; ++m) {
    power = power.cwiseProduct(samples);
    t.moments[static_cast<std::size_t>(m)] = power.sum() / n;
  }
  return t;
}

PceBasis PceBasis::deterministic() {
  PceBasis b;
  b.terms.push_back(PceTerm::constant());
  return b;
}

PceBasis make_prediction_basis(const ResidualModel& rm, Index horizon) {
  if (horizon < 1) throw DimensionError("make_prediction_basis: horizon must be positive");
  PceBasis basis = PceBasis::deterministic();
  if (rm.deterministic()) return basis;

  // The germ is i.i.d. across steps: one moment table per component.
  std::vector<PceTerm> per_component;
  per_component.reserve(static_cast<std::size_t>(rm.n_germ()));
  for (Index i = 0; i < rm.n_germ(); ++i) {
    per_component.push_back(PceTerm::from_samples(0, i, rm.whitened.row(i)));
  }
  basis.terms.reserve(1 + static_cast<std::size_t>(horizon * rm.n_germ()));
  for (Index k = 0; k < horizon; ++k) {
    for (Index i = 0; i < rm.n_germ(); ++i) {
      PceTerm t = per_component[static_cast<std::size_t>(i)];
      t.step = k;
      basis.terms.push_back(t);
    }
  }
  return basis;
}

Matrix affine_pce(const Vector& mean, const Matrix& factor) {
  if (!factor.allFinite() || !mean.allFinite()) {
    throw DomainError("affine_pce: non-finite input");
  }
  if (factor.rows() != 0 && factor.rows() != mean.size()) {
    throw DimensionError("affine_pce: factor rows do not match mean dimension");
  }
  Matrix coeffs(mean.size(), 1 + factor.cols());
  coeffs.col(0) = mean;
  if (factor.cols() > 0) coeffs.rightCols(factor.cols()) = factor;
  return coeffs;
}

double moment2(const RowVector& coeffs, const PceBasis& basis) {
  check_row(coeffs, basis);
  double total = 0.0;
  for (Index j = 1; j < basis.count(); ++j) {
    const double c = coeffs(j);
    total += c * c * basis.terms[static_cast<std::size_t>(j)].moments[2];
  }
  return total;
}

double moment4(const RowVector& coeffs, const PceBasis& basis) {
  check_row(coeffs, basis);
  double quartic = 0.0;   // sum c^4 mu4
  double pair_sum = 0.0;  // sum c^2 mu2
  double pair_sq = 0.0;   // sum (c^2 mu2)^2
  for (Index j = 1; j < basis.count(); ++j) {
    const double c2 = coeffs(j) * coeffs(j);
    const auto& m = basis.terms[static_cast<std::size_t>(j)].moments;
    quartic += c2 * c2 * m[4];
    pair_sum += c2 * m[2];
    pair_sq += c2 * m[2] * c2 * m[2];
  }
  return quartic + 3.0 * (pair_sum * pair_sum - pair_sq);
}

double moment2n(const RowVector& coeffs, const PceBasis& basis, int n) {
  check_row(coeffs, basis);
  if (n < 1) throw DomainError("moment2n: order must be at least 1");
  const int total_order = 2 * n;
  if (total_order > kMaxMomentOrder) {
    throw UnsupportedOrderError("moment2n: order 2n = " +
                                std::to_string(total_order) +
                                " exceeds the supported maximum of 8");
  }

  // Keep only terms with nonzero coefficients; zero terms cannot contribute.
  std::vector<Index> active;
  for (Index j = 1; j < basis.count(); ++j) {
    if (coeffs(j) != 0.0) active.push_back(j);
  }
  const Index m = static_cast<Index>(active.size());

  // factors(j, e) = c_j^e * mu_e(phi_j) / e!, the per-term multinomial factor.
  Matrix factors = Matrix::Zero(m, total_order + 1);
  for (Index j = 0; j < m; ++j) {
    const auto& mom = basis.terms[static_cast<std::size_t>(active[static_cast<std::size_t>(j)])].moments;
    double cpow = 1.0;
    for (int e = 0; e <= total_order; ++e) {
      factors(j, e) = cpow * mom[static_cast<std::size_t>(e)] / kFactorial[e];
      cpow *= coeffs(active[static_cast<std::size_t>(j)]);
    }
  }

  // Depth-first sum over exponent assignments with parts in {0, 2, 3, ...}.
  struct Walker {
    const Matrix& f;
    Index m;
    double run(Index j, int rem) const {
      if (rem == 0) return 1.0;
      if (j >= m || rem == 1) return 0.0;
      double acc = run(j + 1, rem);  // exponent 0 on term j
      for (int e = 2; e <= rem; ++e) {
        if (rem - e == 1) continue;
        acc += f(j, e) * run(j + 1, rem - e);
      }
      return acc;
    }
  };
  const Walker walker{factors, m};
  return kFactorial[total_order] * walker.run(0, total_order);
}

}  // namespace respred
