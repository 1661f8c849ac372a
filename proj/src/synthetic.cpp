#include "respred/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "respred/rng.hpp"

namespace respred {

namespace {

using nlohmann::ordered_json;

double spectral_radius_of(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double sample_noise(const NoiseSpec& spec, double scale, Rng& rng) {
  switch (spec.family) {
    case NoiseFamily::gaussian:
      return scale * rng.gaussian();
    case NoiseFamily::uniform: {
      const double half = std::sqrt(3.0) * scale;
      return rng.uniform(-half, half);
    }
    case NoiseFamily::two_point_mixture: {
      const double p = spec.mixture_weight;
      const double up = scale * std::sqrt((1.0 - p) / p);
      const double down = -scale * std::sqrt(p / (1.0 - p));
      return rng.uniform01() < p ? up : down;
    }
  }
  throw DomainError("unknown noise family");
}

Matrix draw_noise(const NoiseSpec& spec, Index steps, Rng& rng) {
  Matrix v(spec.scale.size(), steps);
  for (Index k = 0; k < steps; ++k) {
    for (Index i = 0; i < spec.scale.size(); ++i) {
      v(i, k) = sample_noise(spec, spec.scale(i), rng);
    }
  }
  return v;
}

ChannelSchema default_names(Index n_u, Index n_ws, Index n_y) {
  ChannelSchema s;
  for (Index i = 0; i < n_u; ++i) s.u.push_back("u" + std::to_string(i + 1));
  for (Index i = 0; i < n_ws; ++i) s.ws.push_back("ws" + std::to_string(i + 1));
  for (Index i = 0; i < n_y; ++i) s.y.push_back("y" + std::to_string(i + 1));
  return s;
}

Dataset pack_dataset(const Matrix& exog, const Matrix& out, Index n_u, Index n_ws,
                     double sample_period) {
  Dataset ds;
  ds.u = exog.topRows(n_u);
  ds.ws = exog.middleRows(n_u, n_ws);
  ds.y = out;
  ds.sample_period = sample_period;
  ds.names = default_names(n_u, n_ws, out.rows());
  ds.timestamps.resize(static_cast<std::size_t>(out.cols()));
  for (Index k = 0; k < out.cols(); ++k) {
    ds.timestamps[static_cast<std::size_t>(k)] = static_cast<double>(k) * sample_period;
  }
  return ds;
}

ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const ordered_json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError("field '" + name + "' is not a matrix");
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const Index cols = static_cast<Index>(j.at(0).size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != cols) {
      throw ParseError("ragged matrix in field '" + name + "'");
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

ordered_json noise_to_json(const NoiseSpec& n) {
  ordered_json j;
  j["family"] = to_string(n.family);
  ordered_json scale = ordered_json::array();
  for (Index i = 0; i < n.scale.size(); ++i) scale.push_back(n.scale(i));
  j["scale"] = std::move(scale);
  j["mixture_weight"] = n.mixture_weight;
  return j;
}

NoiseSpec noise_from_json(const ordered_json& j) {
  NoiseSpec n;
  n.family = noise_family_from_string(j.at("family").get<std::string>());
  const auto& scale = j.at("scale");
  n.scale.resize(static_cast<Index>(scale.size()));
  for (Index i = 0; i < n.scale.size(); ++i) {
    n.scale(i) = scale.at(static_cast<std::size_t>(i)).get<double>();
  }
  n.mixture_weight = j.value("mixture_weight", 0.5);
  return n;
}

}  // namespace

const char* to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::uniform: return "uniform";
    case NoiseFamily::two_point_mixture: return "two_point_mixture";
  }
  return "?";
}

NoiseFamily noise_family_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "uniform") return NoiseFamily::uniform;
  if (name == "two_point_mixture") return NoiseFamily::two_point_mixture;
  throw DomainError("unknown noise family '" + name + "'");
}

void NoiseSpec::validate(Index n_out) const {
  if (scale.size() != n_out) {
    throw ValidationError("noise scale has " + std::to_string(scale.size()) +
                          " components, expected " + std::to_string(n_out));
  }
  if ((scale.array() < 0.0).any()) throw ValidationError("negative noise scale");
  if (family == NoiseFamily::two_point_mixture &&
      (!(mixture_weight > 0.0) || !(mixture_weight < 1.0))) {
    throw ValidationError("mixture weight must lie in (0, 1)");
  }
}

double NoiseSpec::kurtosis() const {
  switch (family) {
    case NoiseFamily::gaussian: return 3.0;
    case NoiseFamily::uniform: return 1.8;
    case NoiseFamily::two_point_mixture: {
      const double pq = mixture_weight * (1.0 - mixture_weight);
      return (1.0 - 3.0 * pq) / pq;
    }
  }
  return 0.0;
}

Matrix ArxTruth::companion() const {
  const Index n = lag * n_y;
  Matrix comp = Matrix::Zero(n, n);
  if (lag > 1) {
    comp.topRightCorner(n - n_y, n - n_y).setIdentity();
  }
  comp.bottomRows(n_y) = lag_coeffs.rightCols(n);
  return comp;
}

double ArxTruth::spectral_radius() const { return spectral_radius_of(companion()); }

void ArxTruth::validate() const {
  if (lag < 1 || n_y < 1 || n_exog() < 1) {
    throw ValidationError("lagged system needs lag >= 1, outputs and inputs");
  }
  if (lag_coeffs.rows() != n_y || lag_coeffs.cols() != n_init()) {
    throw ValidationError("lag coefficient block has the wrong shape");
  }
  if (feedthrough.rows() != n_y || feedthrough.cols() != n_exog()) {
    throw ValidationError("feedthrough block has the wrong shape");
  }
  noise.validate(n_y);
  if (!(spectral_radius() < 1.0)) {
    throw ValidationError("output recursion is not Schur stable");
  }
}

void StateSpaceTruth::validate(double rank_tol) const {
  const Index n = n_state();
  if (n < 1) throw ValidationError("state dimension must be positive");
  if (A.cols() != n || B.rows() != n || C.cols() != n || E.rows() != n) {
    throw ValidationError("state-space blocks have inconsistent shapes");
  }
  if (B.cols() != n_exog() || D.cols() != n_exog() || D.rows() != n_out() ||
      F.rows() != n_out() || F.cols() != n_dist()) {
    throw ValidationError("input/output blocks have inconsistent shapes");
  }
  noise.validate(n_dist());
  if (!(spectral_radius_of(A) < 1.0)) throw ValidationError("A is not Schur stable");

  Matrix ctrb(n, n * B.cols());
  Matrix block = B;
  for (Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * B.cols(), B.cols()) = block;
    block = A * block;
  }
  Matrix obsv(n * C.rows(), n);
  Matrix crow = C;
  for (Index i = 0; i < n; ++i) {
    obsv.middleRows(i * C.rows(), C.rows()) = crow;
    crow = crow * A;
  }
  // minimality at the numerical rank tolerance
  auto rank = [&](const Matrix& m) {
    Eigen::BDCSVD<Matrix> svd(m);
    const Vector& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return Index{0};
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) >= rank_tol * s(0)) ++r;
    }
    return r;
  };
  if (rank(ctrb) < n) throw ValidationError("pair (A, B) is not controllable");
  if (rank(obsv) < n) throw ValidationError("pair (A, C) is not observable");
}

ArxTruth random_arx(Index n_u, Index n_ws, Index n_y, Index lag,
                    double stability_margin, NoiseSpec noise, std::uint64_t seed) {
  if (!(stability_margin > 0.0) || !(stability_margin < 1.0)) {
    throw DomainError("random_arx: stability margin must lie in (0, 1)");
  }
  ArxTruth sys;
  sys.lag = lag;
  sys.n_u = n_u;
  sys.n_ws = n_ws;
  sys.n_y = n_y;
  sys.noise = std::move(noise);
  sys.seed = seed;
  sys.noise.validate(n_y);

  Rng rng(derive_seed(seed, "arx-coefficients"));
  sys.lag_coeffs.resize(n_y, sys.n_init());
  sys.feedthrough.resize(n_y, sys.n_exog());
  for (Index i = 0; i < n_y; ++i) {
    for (Index j = 0; j < sys.n_init(); ++j) sys.lag_coeffs(i, j) = rng.uniform(-1.0, 1.0);
    for (Index j = 0; j < sys.n_exog(); ++j) sys.feedthrough(i, j) = rng.uniform(-1.0, 1.0);
  }

  const double target = 1.0 - stability_margin;
  for (int round = 0; round < 100; ++round) {
    const double rho = sys.spectral_radius();
    if (rho <= target) return sys;
    // Scaling the block of output-lag i by s^i scales every companion
    // eigenvalue by s.
    const double s = 0.999 * target / rho;
    const Index y_base = lag * sys.n_exog();
    double factor = s;
    for (Index i = lag - 1; i >= 0; --i) {
      sys.lag_coeffs.middleCols(y_base + i * n_y, n_y) *= factor;
      factor *= s;
    }
  }
  throw GenerationError("random_arx: could not stabilize after 100 rounds");
}

SimResult simulate(const ArxTruth& sys, const Matrix& exog, std::uint64_t seed,
                   double sample_period) {
  if (exog.rows() != sys.n_exog()) {
    throw DimensionError("simulate: exogenous signal has " +
                         std::to_string(exog.rows()) + " channels, expected " +
                         std::to_string(sys.n_exog()));
  }
  const Index steps = exog.cols();
  Rng rng(derive_seed(seed, "residual-noise"));
  Matrix v = draw_noise(sys.noise, steps, rng);

  const Index ne = sys.n_exog();
  const Index ny = sys.n_y;
  Matrix out(ny, steps);
  Vector z(sys.n_init());
  for (Index k = 0; k < steps; ++k) {
    z.setZero();
    for (Index i = 0; i < sys.lag; ++i) {
      const Index src = k - sys.lag + i;
      if (src < 0) continue;  // zero initial history
      z.segment(i * ne, ne) = exog.col(src);
      z.segment(sys.lag * ne + i * ny, ny) = out.col(src);
    }
    out.col(k) = sys.lag_coeffs * z + sys.feedthrough * exog.col(k) + v.col(k);
  }
  return {pack_dataset(exog, out, sys.n_u, sys.n_ws, sample_period), std::move(v)};
}

SimResult simulate(const StateSpaceTruth& sys, const Matrix& exog, std::uint64_t seed,
                   double sample_period) {
  if (exog.rows() != sys.n_exog()) {
    throw DimensionError("simulate: exogenous signal has " +
                         std::to_string(exog.rows()) + " channels, expected " +
                         std::to_string(sys.n_exog()));
  }
  const Index steps = exog.cols();
  Rng rng(derive_seed(seed, "unstructured-noise"));
  Matrix w = draw_noise(sys.noise, steps, rng);

  Matrix out(sys.n_out(), steps);
  Vector x = Vector::Zero(sys.n_state());
  for (Index k = 0; k < steps; ++k) {
    out.col(k) = sys.C * x + sys.D * exog.col(k) + sys.F * w.col(k);
    x = sys.A * x + sys.B * exog.col(k) + sys.E * w.col(k);
  }
  return {pack_dataset(exog, out, sys.n_u, sys.n_ws, sample_period), std::move(w)};
}

Index lag_of(const StateSpaceTruth& sys, double rank_tol) {
  const Index n = sys.n_state();
  Matrix stack(0, n);
  Matrix crow = sys.C;
  for (Index l = 1; l <= n; ++l) {
    Matrix grown(stack.rows() + sys.C.rows(), n);
    grown.topRows(stack.rows()) = stack;
    grown.bottomRows(sys.C.rows()) = crow;
    stack = std::move(grown);
    crow = crow * sys.A;

    Eigen::BDCSVD<Matrix> svd(stack);
    const Vector& s = svd.singularValues();
    Index rank = 0;
    if (s.size() > 0 && s(0) > 0.0) {
      for (Index i = 0; i < s.size(); ++i) {
        if (s(i) >= rank_tol * s(0)) ++rank;
      }
    }
    if (rank == n) return l;
  }
  throw ValidationError("lag_of: system is not observable");
}

Matrix random_uniform_inputs(Index dim, Index steps, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(dim, steps);
  for (Index k = 0; k < steps; ++k) {
    for (Index i = 0; i < dim; ++i) m(i, k) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

std::string truth_to_json(const TruthSystem& truth) {
  ordered_json j;
  if (const auto* arx = std::get_if<ArxTruth>(&truth)) {
    j["type"] = "arx";
    j["lag"] = arx->lag;
    j["n_u"] = arx->n_u;
    j["n_ws"] = arx->n_ws;
    j["n_y"] = arx->n_y;
    j["lag_coeffs"] = matrix_to_json(arx->lag_coeffs);
    j["feedthrough"] = matrix_to_json(arx->feedthrough);
    j["noise"] = noise_to_json(arx->noise);
    j["seed"] = arx->seed;
  } else {
    const auto& ss = std::get<StateSpaceTruth>(truth);
    j["type"] = "state_space";
    j["n_u"] = ss.n_u;
    j["n_ws"] = ss.n_ws;
    j["A"] = matrix_to_json(ss.A);
    j["B"] = matrix_to_json(ss.B);
    j["C"] = matrix_to_json(ss.C);
    j["D"] = matrix_to_json(ss.D);
    j["E"] = matrix_to_json(ss.E);
    j["F"] = matrix_to_json(ss.F);
    j["noise"] = noise_to_json(ss.noise);
    j["seed"] = ss.seed;
  }
  return j.dump(2);
}

TruthSystem truth_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid truth-system JSON: ") + e.what());
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "arx") {
    ArxTruth sys;
    sys.lag = j.at("lag").get<Index>();
    sys.n_u = j.at("n_u").get<Index>();
    sys.n_ws = j.at("n_ws").get<Index>();
    sys.n_y = j.at("n_y").get<Index>();
    sys.lag_coeffs = matrix_from_json(j.at("lag_coeffs"), "lag_coeffs");
    sys.feedthrough = matrix_from_json(j.at("feedthrough"), "feedthrough");
    sys.noise = noise_from_json(j.at("noise"));
    sys.seed = j.value("seed", std::uint64_t{0});
    sys.validate();
    return sys;
  }
  if (type == "state_space") {
    StateSpaceTruth sys;
    sys.n_u = j.at("n_u").get<Index>();
    sys.n_ws = j.at("n_ws").get<Index>();
    sys.A = matrix_from_json(j.at("A"), "A");
    sys.B = matrix_from_json(j.at("B"), "B");
    sys.C = matrix_from_json(j.at("C"), "C");
    sys.D = matrix_from_json(j.at("D"), "D");
    sys.E = matrix_from_json(j.at("E"), "E");
    sys.F = matrix_from_json(j.at("F"), "F");
    sys.noise = noise_from_json(j.at("noise"));
    sys.seed = j.value("seed", std::uint64_t{0});
    sys.validate();
    return sys;
  }
  throw ParseError("unknown truth-system type '" + type + "'");
}

TruthSystem load_truth(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << file.rdbuf();
  return truth_from_json(ss.str());
}

void save_truth(const TruthSystem& truth, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot write '" + path + "'");
  file << truth_to_json(truth) << '\n';
  if (!file) throw IoError("write failed for '" + path + "'");
}

}  // namespace respred
