#include "respred/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace respred {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n\"";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, Index row, const std::string& col) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("non-numeric value '" + cell + "' in column '" + col +
                     "' at row " + std::to_string(row));
  }
  if (!std::isfinite(v)) {
    throw ParseError("non-finite value in column '" + col + "' at row " +
                     std::to_string(row));
  }
  return v;
}

void format_cell(char* buf, std::size_t n, double v) {
  std::snprintf(buf, n, "%.17g", v);
}

std::uint64_t hash_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_matrix(std::uint64_t h, const Matrix& m) {
  h = hash_bytes(h, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  return h;
}

}  // namespace

Matrix Dataset::exog() const {
  Matrix out(n_exog(), size());
  out.topRows(n_u()) = u;
  if (n_ws() > 0) out.bottomRows(n_ws()) = ws;
  return out;
}

void Dataset::validate() const {
  const Index n = size();
  if (n < 1) throw ValidationError("dataset is empty");
  if (u.cols() != n || (ws.rows() > 0 && ws.cols() != n) ||
      static_cast<Index>(timestamps.size()) != n) {
    throw ValidationError("channel lengths differ");
  }
  if (!u.allFinite() || !y.allFinite() || (ws.size() > 0 && !ws.allFinite())) {
    throw ValidationError("dataset contains non-finite values");
  }
  for (double ts : timestamps) {
    if (!std::isfinite(ts)) throw ValidationError("non-finite timestamp");
  }
  if (n >= 2) {
    if (!(sample_period > 0.0)) {
      throw ValidationError("sample period must be positive");
    }
    for (Index k = 1; k < n; ++k) {
      const double gap = timestamps[static_cast<std::size_t>(k)] -
                         timestamps[static_cast<std::size_t>(k - 1)];
      if (!(gap > 0.0)) throw ValidationError("timestamps not strictly increasing");
      if (std::abs(gap - sample_period) > 1e-6 * sample_period) {
        throw ValidationError("non-uniform sampling at row " + std::to_string(k) +
                              ": gap " + std::to_string(gap) + " vs period " +
                              std::to_string(sample_period));
      }
    }
  }
}

Dataset load_csv(const std::string& path, const ChannelSchema& schema) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(file, line)) throw ParseError("empty file '" + path + "'");
  const std::vector<std::string> header = split_line(line);

  std::unordered_map<std::string, Index> col_of;
  for (Index i = 0; i < static_cast<Index>(header.size()); ++i) {
    col_of[header[static_cast<std::size_t>(i)]] = i;
  }
  auto require = [&](const std::string& name) -> Index {
    auto it = col_of.find(name);
    if (it == col_of.end()) {
      throw SchemaError("missing column '" + name + "' in '" + path + "'");
    }
    return it->second;
  };

  const Index ts_col = require("timestamp");
  std::vector<Index> u_cols, ws_cols, y_cols;
  for (const auto& n : schema.u) u_cols.push_back(require(n));
  for (const auto& n : schema.ws) ws_cols.push_back(require(n));
  for (const auto& n : schema.y) y_cols.push_back(require(n));

  std::vector<std::vector<double>> rows;
  Index row_idx = 0;
  while (std::getline(file, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row_idx) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()));
    }
    std::vector<double> parsed(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      parsed[c] = parse_cell(cells[c], row_idx, header[c]);
    }
    rows.push_back(std::move(parsed));
    ++row_idx;
  }
  const Index n = static_cast<Index>(rows.size());
  if (n < 1) throw ParseError("no data rows in '" + path + "'");

  Dataset ds;
  ds.names = schema;
  ds.timestamps.resize(static_cast<std::size_t>(n));
  ds.u.resize(static_cast<Index>(u_cols.size()), n);
  ds.ws.resize(static_cast<Index>(ws_cols.size()), n);
  ds.y.resize(static_cast<Index>(y_cols.size()), n);
  for (Index k = 0; k < n; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    ds.timestamps[static_cast<std::size_t>(k)] = r[static_cast<std::size_t>(ts_col)];
    for (Index i = 0; i < ds.n_u(); ++i)
      ds.u(i, k) = r[static_cast<std::size_t>(u_cols[static_cast<std::size_t>(i)])];
    for (Index i = 0; i < ds.n_ws(); ++i)
      ds.ws(i, k) = r[static_cast<std::size_t>(ws_cols[static_cast<std::size_t>(i)])];
    for (Index i = 0; i < ds.n_y(); ++i)
      ds.y(i, k) = r[static_cast<std::size_t>(y_cols[static_cast<std::size_t>(i)])];
  }
  ds.sample_period = n >= 2 ? ds.timestamps[1] - ds.timestamps[0] : 0.0;
  ds.validate();
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot write '" + path + "'");
  file << "timestamp";
  for (const auto& n : ds.names.u) file << ',' << n;
  for (const auto& n : ds.names.ws) file << ',' << n;
  for (const auto& n : ds.names.y) file << ',' << n;
  file << '\n';

  char buf[40];
  for (Index k = 0; k < ds.size(); ++k) {
    format_cell(buf, sizeof buf, ds.timestamps[static_cast<std::size_t>(k)]);
    file << buf;
    for (Index i = 0; i < ds.n_u(); ++i) {
      format_cell(buf, sizeof buf, ds.u(i, k));
      file << ',' << buf;
    }
    for (Index i = 0; i < ds.n_ws(); ++i) {
      format_cell(buf, sizeof buf, ds.ws(i, k));
      file << ',' << buf;
    }
    for (Index i = 0; i < ds.n_y(); ++i) {
      format_cell(buf, sizeof buf, ds.y(i, k));
      file << ',' << buf;
    }
    file << '\n';
  }
  if (!file) throw IoError("write failed for '" + path + "'");
}

std::uint64_t ExperimentWindow::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const Index meta[4] = {t, length, lag, horizon};
  h = hash_bytes(h, meta, sizeof meta);
  h = hash_matrix(h, past_exog);
  h = hash_matrix(h, past_out);
  return h;
}

Index min_window_length(Index lag, Index horizon, Index n_exog, Index n_out) {
  const Index order = lag * (n_exog + n_out) + horizon;
  return order * (n_exog + n_out) + order - 1;
}

ExperimentWindow make_window(const Dataset& ds, Index t, Index length, Index lag,
                             Index horizon, bool with_truth) {
  if (length < 1 || lag < 1 || horizon < 1) {
    throw DimensionError("make_window: length, lag and horizon must be positive");
  }
  if (t - length - lag < 0) {
    throw BoundsError("make_window: window start " + std::to_string(t - length - lag) +
                      " before the dataset (t=" + std::to_string(t) + ")");
  }
  const bool future_available = t + horizon <= ds.size();
  if (with_truth && !future_available) {
    throw BoundsError("make_window: window end " + std::to_string(t + horizon) +
                      " past the dataset length " + std::to_string(ds.size()));
  }
  if (t > ds.size()) {
    throw BoundsError("make_window: anchor t=" + std::to_string(t) +
                      " past the dataset length");
  }

  const Matrix exog = ds.exog();
  ExperimentWindow w;
  w.t = t;
  w.length = length;
  w.lag = lag;
  w.horizon = horizon;
  w.past_exog = exog.middleCols(t - length - lag, length + lag);
  w.past_out = ds.y.middleCols(t - length - lag, length + lag);

  const Index ne = w.n_exog();
  const Index no = w.n_out();
  w.init_cond.resize(lag * (ne + no));
  for (Index i = 0; i < lag; ++i) {
    w.init_cond.segment(i * ne, ne) = exog.col(t - lag + i);
    w.init_cond.segment(lag * ne + i * no, no) = ds.y.col(t - lag + i);
  }

  if (future_available) {
    w.future_exog = exog.middleCols(t, horizon);
    if (with_truth) w.future_truth = ds.y.middleCols(t, horizon);
  }
  return w;
}

}  // namespace respred
