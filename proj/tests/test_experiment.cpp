#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "respred/experiment.hpp"
#include "respred/rng.hpp"
#include "respred/synthetic.hpp"

using namespace respred;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir.string();
}

ScenarioResult scalar_scenario(Index t, double truth, double mean, double rad,
                               BoundFamily fam) {
  ScenarioResult r;
  r.t = t;
  r.truth = Matrix::Constant(1, 1, truth);
  r.mean = Matrix::Constant(1, 1, mean);
  r.subspace = Matrix::Constant(1, 1, mean);
  r.radii[fam] = Matrix::Constant(1, 1, rad);
  return r;
}

SimResult telemetry_style_simulation() {
  NoiseSpec noise{NoiseFamily::gaussian, Vector::Constant(4, 0.2), 0.5};
  const ArxTruth sys = random_arx(12, 6, 4, 1, 0.3, noise, 314);
  const Matrix inputs = random_uniform_inputs(18, 560, derive_seed(314, "in"));
  return simulate(sys, inputs, 314);
}

ExperimentConfig telemetry_config(const std::string& outdir) {
  ExperimentConfig cfg;
  cfg.T = 400;
  cfg.N = 12;
  cfg.lag = 1;
  cfg.stride = 24;
  cfg.gamma = 0.9;
  cfg.u_channels = {"u1", "u2", "u3", "u4", "u5", "u6", "u7", "u8", "u9", "u10",
                    "u11", "u12"};
  cfg.ws_channels = {"ws1", "ws2", "ws3", "ws4", "ws5", "ws6"};
  cfg.y_channels = {"y1", "y2", "y3", "y4"};
  cfg.out_dir = outdir;
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("summary formulas on hand-built scenarios") {
  ExperimentConfig cfg;
  cfg.T = 10;
  cfg.N = 1;
  cfg.lag = 1;
  cfg.bounds = {BoundFamily::cheb2};

  SUBCASE("rmse of errors 0 and 2") {
    std::vector<ScenarioResult> rs = {
        scalar_scenario(11, 1.0, 1.0, 1.0, BoundFamily::cheb2),
        scalar_scenario(12, 3.0, 1.0, 1.0, BoundFamily::cheb2)};
    const SummaryReport rep = summarize(rs, cfg);
    CHECK(*rep.rmse == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  }

  SUBCASE("coverage of half-covering intervals") {
    std::vector<ScenarioResult> rs = {
        scalar_scenario(11, 0.0, 0.0, 1.0, BoundFamily::cheb2),
        scalar_scenario(12, 5.0, 0.0, 1.0, BoundFamily::cheb2)};
    const SummaryReport rep = summarize(rs, cfg);
    CHECK(rep.per_bound.at(BoundFamily::cheb2).coverage == doctest::Approx(0.5));
    CHECK(rep.per_bound.at(BoundFamily::cheb2).mean_radius == doctest::Approx(1.0));
  }

  SUBCASE("skipped scenarios are excluded from the averages") {
    ScenarioResult skipped;
    skipped.t = 13;
    skipped.skipped = true;
    skipped.skip_reason = "excitation";
    std::vector<ScenarioResult> rs = {
        scalar_scenario(11, 1.0, 1.0, 1.0, BoundFamily::cheb2), skipped};
    const SummaryReport rep = summarize(rs, cfg);
    CHECK(rep.scenario_count == 1);
    CHECK(rep.skipped_count == 1);
    CHECK(*rep.rmse == doctest::Approx(0.0));
  }

  SUBCASE("no usable scenario leaves the metrics empty") {
    const SummaryReport rep = summarize({}, cfg);
    CHECK_FALSE(rep.rmse.has_value());
    CHECK(rep.scenario_count == 0);
  }
}

TEST_CASE("config json round trip and validation") {
  ExperimentConfig cfg;
  cfg.T = 2880;
  cfg.N = 96;
  cfg.lag = 4;
  cfg.stride = 24;
  cfg.gamma = 0.9;
  cfg.bounds = {BoundFamily::cheb4};
  cfg.u_channels = {"a", "b"};
  cfg.ws_channels = {"s"};
  cfg.y_channels = {"t1"};
  cfg.seed = 7;
  cfg.out_dir = "reports";
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.T == cfg.T);
  CHECK(back.N == cfg.N);
  CHECK(back.stride == cfg.stride);
  CHECK(back.bounds == cfg.bounds);
  CHECK(back.ws_channels == cfg.ws_channels);
  CHECK(back.out_dir == cfg.out_dir);

  CHECK_THROWS_AS(config_from_json("{\"T\": 10, \"N\": 0}"), ValidationError);
  CHECK_THROWS_AS(config_from_json("{\"T\": 10, \"N\": 2, \"gamma\": 1.5}"),
                  ValidationError);
  CHECK_THROWS_AS(config_from_json("not json"), ParseError);
}

TEST_CASE("rolling pipeline on a wide synthetic system") {
  const SimResult sim = telemetry_style_simulation();
  const std::string outdir = temp_dir("respred_exp_wide");
  ExperimentConfig cfg = telemetry_config(outdir);

  const auto [results, report] = run(cfg, sim.data);
  REQUIRE(report.scenario_count + report.skipped_count ==
          static_cast<Index>(results.size()));
  REQUIRE(report.scenario_count >= 5);
  CHECK(report.skipped_count == 0);
  CHECK(report.rmse.has_value());
  // causal mean should beat the deterministic subspace trajectory here
  CHECK(*report.rmse <= *report.rmse_subspace * 1.5);

  for (const ScenarioResult& r : results) {
    CHECK(r.mean.rows() == 4);
    CHECK(r.mean.cols() == cfg.N);
    for (const auto& [fam, rad] : r.radii) CHECK(rad.minCoeff() >= 0.0);
  }

  SUBCASE("reports are self-consistent and deterministic") {
    emit_reports(results, report, outdir);
    const std::string summary_a = slurp(outdir + "/summary.json");
    emit_reports(results, report, outdir);
    CHECK(slurp(outdir + "/summary.json") == summary_a);

    // independent re-aggregation from the emitted rows
    std::ifstream csv(outdir + "/scenarios.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,k,output,truth,mean,subspace,radius_cheb2,radius_cheb4,"
                  "radius_gauss");
    double sq = 0.0;
    double hit2 = 0.0, rad2 = 0.0;
    Index rows = 0;
    while (std::getline(csv, line)) {
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> v;
      while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 9);
      sq += (v[3] - v[4]) * (v[3] - v[4]);
      hit2 += std::abs(v[3] - v[4]) <= v[6] ? 1.0 : 0.0;
      rad2 += v[6];
      ++rows;
    }
    CHECK(rows == report.scenario_count * cfg.N * 4);
    const double rmse = std::sqrt(sq / static_cast<double>(report.scenario_count * cfg.N));
    CHECK(rmse == doctest::Approx(*report.rmse).epsilon(1e-9));
    CHECK(hit2 / static_cast<double>(rows) ==
          doctest::Approx(report.per_bound.at(BoundFamily::cheb2).coverage)
              .epsilon(1e-9));
    CHECK(rad2 / static_cast<double>(rows) ==
          doctest::Approx(report.per_bound.at(BoundFamily::cheb2).mean_radius)
              .epsilon(1e-9));
  }

  SUBCASE("dropping the structured channels still runs") {
    ExperimentConfig no_ws = cfg;
    no_ws.ws_channels.clear();
    const auto [results2, report2] = run(no_ws, sim.data);
    CHECK(report2.scenario_count == report.scenario_count);
    CHECK(report2.rmse.has_value());
    // unknown channel names are refused
    ExperimentConfig bad = cfg;
    bad.ws_channels = {"ws9"};
    CHECK_THROWS_AS(run(bad, sim.data), SchemaError);
  }

  SUBCASE("parallel scenario execution is bitwise identical") {
    ExperimentConfig par = cfg;
    par.threads = 4;
    const auto [results2, report2] = run(par, sim.data);
    REQUIRE(results2.size() == results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      CHECK(results2[i].t == results[i].t);
      CHECK(results2[i].mean == results[i].mean);
      CHECK(results2[i].radii.at(BoundFamily::gauss) ==
            results[i].radii.at(BoundFamily::gauss));
    }
    CHECK(*report2.rmse == *report.rmse);
  }
}

TEST_CASE("report shapes for degenerate inputs") {
  const std::string outdir = temp_dir("respred_exp_mini");
  ExperimentConfig cfg;
  cfg.T = 8;
  cfg.N = 2;
  cfg.lag = 1;
  cfg.bounds = {BoundFamily::cheb4};

  SUBCASE("empty result list") {
    const SummaryReport rep = summarize({}, cfg);
    emit_reports({}, rep, outdir);
    const std::string csv = slurp(outdir + "/scenarios.csv");
    CHECK(csv == "t,k,output,truth,mean,subspace,radius_cheb4\n");
    CHECK(slurp(outdir + "/summary.json").find("\"rmse\": null") != std::string::npos);
  }

  SUBCASE("single scenario with one radius column") {
    ScenarioResult r;
    r.t = 9;
    r.truth = Matrix::Constant(1, 2, 1.0);
    r.mean = Matrix::Constant(1, 2, 1.0);
    r.subspace = Matrix::Constant(1, 2, 1.0);
    r.radii[BoundFamily::cheb4] = Matrix::Constant(1, 2, 0.5);
    const SummaryReport rep = summarize({r}, cfg);
    emit_reports({r}, rep, outdir);
    std::ifstream csv(outdir + "/scenarios.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,k,output,truth,mean,subspace,radius_cheb4");
    int data_rows = 0;
    while (std::getline(csv, line)) {
      if (!line.empty()) ++data_rows;
    }
    CHECK(data_rows == 2);
  }
}

TEST_CASE("too-short datasets are refused up front") {
  const SimResult sim = telemetry_style_simulation();
  ExperimentConfig cfg = telemetry_config(temp_dir("respred_exp_short"));
  cfg.T = 1000;
  CHECK_THROWS_AS(run(cfg, sim.data), ValidationError);
}

}  // TEST_SUITE
