#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "respred/dataset.hpp"
#include "respred/rng.hpp"

using namespace respred;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  f << content;
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("basic parse") {
  const std::string path = temp_path("respred_basic.csv");
  FileGuard guard{path};
  write_file(path,
             "timestamp,u1,y1\n"
             "0,1.5,2.5\n"
             "1,1.6,2.6\n"
             "2,1.7,2.7\n"
             "3,1.8,2.8\n");
  const Dataset ds = load_csv(path, {{"u1"}, {}, {"y1"}});
  CHECK(ds.size() == 4);
  CHECK(ds.n_u() == 1);
  CHECK(ds.n_ws() == 0);
  CHECK(ds.n_y() == 1);
  CHECK(ds.sample_period == 1.0);
  CHECK(ds.u(0, 2) == 1.7);
  CHECK(ds.y(0, 3) == 2.8);
}

TEST_CASE("nan cell is rejected with its row index") {
  const std::string path = temp_path("respred_nan.csv");
  FileGuard guard{path};
  write_file(path,
             "timestamp,u1,y1\n"
             "0,1,1\n"
             "1,1,1\n"
             "2,1,nan\n"
             "3,1,1\n");
  CHECK_THROWS_WITH_AS(load_csv(path, {{"u1"}, {}, {"y1"}}),
                       doctest::Contains("row 2"), ParseError);
}

TEST_CASE("missing schema column") {
  const std::string path = temp_path("respred_missing.csv");
  FileGuard guard{path};
  write_file(path, "timestamp,u1,y1\n0,1,1\n1,1,1\n");
  CHECK_THROWS_WITH_AS(load_csv(path, {{"u1"}, {"ws1"}, {"y1"}}),
                       doctest::Contains("ws1"), SchemaError);
}

TEST_CASE("non-uniform timestamps") {
  const std::string path = temp_path("respred_grid.csv");
  FileGuard guard{path};
  write_file(path, "timestamp,u1,y1\n0,1,1\n1,1,1\n2.5,1,1\n");
  CHECK_THROWS_AS(load_csv(path, {{"u1"}, {}, {"y1"}}), ValidationError);
}

TEST_CASE("wide telemetry-style schema") {
  const std::string path = temp_path("respred_wide.csv");
  FileGuard guard{path};
  ChannelSchema schema;
  std::string header = "timestamp";
  for (int i = 1; i <= 12; ++i) {
    schema.u.push_back("u" + std::to_string(i));
    header += ",u" + std::to_string(i);
  }
  for (int i = 1; i <= 6; ++i) {
    schema.ws.push_back("w" + std::to_string(i));
    header += ",w" + std::to_string(i);
  }
  for (int i = 1; i <= 4; ++i) {
    schema.y.push_back("y" + std::to_string(i));
    header += ",y" + std::to_string(i);
  }
  std::string content = header + "\n";
  for (int k = 0; k < 3; ++k) {
    content += std::to_string(900 * k);
    for (int c = 0; c < 22; ++c) content += "," + std::to_string(c + k);
    content += "\n";
  }
  write_file(path, content);
  const Dataset ds = load_csv(path, schema);
  CHECK(ds.n_exog() == 18);
  CHECK(ds.n_y() == 4);
  CHECK(ds.sample_period == 900.0);
}

TEST_CASE("csv round trip is bit-exact") {
  Rng rng(4711);
  Dataset ds;
  const Index n = 17;
  ds.u.resize(2, n);
  ds.ws.resize(1, n);
  ds.y.resize(2, n);
  for (Index k = 0; k < n; ++k) {
    ds.timestamps.push_back(1.6e9 + 900.0 * static_cast<double>(k));
    for (Index i = 0; i < 2; ++i) ds.u(i, k) = rng.gaussian() * 1e3;
    ds.ws(0, k) = rng.uniform(-1e-7, 1e-7);
    for (Index i = 0; i < 2; ++i) ds.y(i, k) = rng.gaussian() / 3.0;
  }
  ds.sample_period = 900.0;
  ds.names = {{"u1", "u2"}, {"ws1"}, {"y1", "y2"}};

  const std::string path = temp_path("respred_roundtrip.csv");
  FileGuard guard{path};
  write_csv(ds, path);
  const Dataset back = load_csv(path, ds.names);
  CHECK(back.u == ds.u);
  CHECK(back.ws == ds.ws);
  CHECK(back.y == ds.y);
  CHECK(back.timestamps == ds.timestamps);
}

TEST_CASE("window slicing") {
  Dataset ds;
  const Index n = 10;
  ds.u.resize(1, n);
  ds.ws.resize(0, n);
  ds.y.resize(1, n);
  for (Index k = 0; k < n; ++k) {
    ds.timestamps.push_back(static_cast<double>(k));
    ds.u(0, k) = 100.0 + static_cast<double>(k);
    ds.y(0, k) = 200.0 + static_cast<double>(k);
  }
  ds.sample_period = 1.0;

  const ExperimentWindow w = make_window(ds, 6, 4, 1, 2);
  // past covers steps 1..5
  CHECK(w.past_exog.cols() == 5);
  CHECK(w.past_exog(0, 0) == 101.0);
  CHECK(w.past_out(0, 4) == 205.0);
  // initial condition from step 5, exogenous first
  CHECK(w.init_cond.size() == 2);
  CHECK(w.init_cond(0) == 105.0);
  CHECK(w.init_cond(1) == 205.0);
  // future covers steps 6..7
  CHECK(w.future_exog(0, 0) == 106.0);
  CHECK(w.future_truth(0, 1) == 207.0);

  SUBCASE("truth slice matches the dataset for every valid anchor") {
    for (Index t = 5; t + 2 <= n; ++t) {
      const ExperimentWindow v = make_window(ds, t, 4, 1, 2);
      CHECK(v.future_truth == ds.y.middleCols(t, 2));
    }
  }

  SUBCASE("one step too early is out of bounds") {
    CHECK_THROWS_AS(make_window(ds, 4, 4, 1, 2), BoundsError);
  }

  SUBCASE("truth-bearing window cannot extend past the data") {
    CHECK_THROWS_AS(make_window(ds, 9, 4, 1, 2), BoundsError);
    const ExperimentWindow v = make_window(ds, 9, 4, 1, 2, false);
    CHECK(v.future_truth.size() == 0);
  }
}

TEST_CASE("minimum window length for the excitation test") {
  // order * dim Hankel rows must fit into length - order + 1 columns
  const Index lag = 2, horizon = 10, n_exog = 2, n_out = 2;
  const Index order = lag * (n_exog + n_out) + horizon;
  const Index bound = min_window_length(lag, horizon, n_exog, n_out);
  CHECK(bound == order * (n_exog + n_out) + order - 1);
  CHECK(bound - order + 1 >= order * (n_exog + n_out));
  CHECK(bound - 1 - order + 1 < order * (n_exog + n_out));
}

TEST_CASE("telemetry protocol window shapes") {
  // 15-minute grid, 30-day window, 24-hour horizon, 6-hour stride
  const Index T = 2880, N = 96, lag = 4;
  Dataset ds;
  const Index n = T + lag + N + 24;
  ds.u.resize(12, n);
  ds.ws.resize(6, n);
  ds.y.resize(4, n);
  ds.u.setConstant(0.5);
  ds.ws.setConstant(1.5);
  ds.y.setConstant(21.0);
  for (Index k = 0; k < n; ++k) ds.timestamps.push_back(900.0 * static_cast<double>(k));
  ds.sample_period = 900.0;

  const ExperimentWindow w = make_window(ds, T + lag, T, lag, N);
  CHECK(w.n_exog() == 18);
  CHECK(w.past_exog.cols() == T + lag);
  CHECK(w.init_cond.size() == lag * 22);
  CHECK(w.future_exog.cols() == N);
  CHECK(w.future_truth.rows() == 4);
  const ExperimentWindow w2 = make_window(ds, T + lag + 24, T, lag, N);
  CHECK(w2.past_exog(0, 0) == 0.5);
}

}  // TEST_SUITE
