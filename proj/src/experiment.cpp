#include "respred/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "respred/pce.hpp"
#include "respred/predictor.hpp"
#include "respred/residual.hpp"

namespace respred {

namespace {

using nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ScenarioResult run_scenario(const ExperimentConfig& cfg, const Dataset& ds, Index t) {
  ScenarioResult res;
  res.t = t;
  try {
    const ExperimentWindow window = make_window(ds, t, cfg.T, cfg.lag, cfg.N);
    const RegressorBundle rb =
        build_regressor(window.past_exog, window.past_out, cfg.lag);
    const Matrix out_current = window.past_out.rightCols(cfg.T);
    const ResidualModel rm = estimate_residuals(rb, out_current, {cfg.rank_tol});
    const auto [op, sp] = build_predictors(window, rm, {cfg.svd_tol, cfg.rank_tol});

    const Vector exog_flat = Eigen::Map<const Vector>(
        window.future_exog.data(), window.future_exog.size());
    const PcePrediction pred = predict_causal(op, window.init_cond, exog_flat, rm);
    const Vector sp_flat = predict_subspace(sp, window.init_cond, exog_flat);

    const Index n_out = window.n_out();
    res.mean = Eigen::Map<const Matrix>(pred.coeffs.col(0).data(), n_out, cfg.N);
    res.subspace = Eigen::Map<const Matrix>(sp_flat.data(), n_out, cfg.N);
    res.truth = window.future_truth;
    for (BoundFamily fam : cfg.bounds) {
      res.radii[fam] = Matrix::Zero(n_out, cfg.N);
    }
    for (Index k = 0; k < cfg.N; ++k) {
      for (Index i = 0; i < n_out; ++i) {
        const RowVector row = pred.coeffs.row(k * n_out + i);
        const double mu2 = moment2(row, pred.basis);
        const double mu4 = moment4(row, pred.basis);
        for (BoundFamily fam : cfg.bounds) {
          res.radii[fam](i, k) = radius({fam, cfg.gamma}, mu2, mu4);
        }
      }
    }
  } catch (const Error& e) {
    res = ScenarioResult{};
    res.t = t;
    res.skipped = true;
    res.skip_reason = e.what();
  }
  return res;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (T < 1 || N < 1 || lag < 1 || stride < 1) {
    throw ValidationError("config: T, N, lag and stride must be at least 1");
  }
  if (!(gamma > 0.0) || !(gamma < 1.0)) {
    throw ValidationError("config: gamma must lie in (0, 1)");
  }
  if (bounds.empty()) throw ValidationError("config: no bound families selected");
  if (threads < 1) throw ValidationError("config: threads must be at least 1");
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["T"] = cfg.T;
  j["N"] = cfg.N;
  j["lag"] = cfg.lag;
  j["stride"] = cfg.stride;
  j["gamma"] = cfg.gamma;
  ordered_json fams = ordered_json::array();
  for (BoundFamily f : cfg.bounds) fams.push_back(to_string(f));
  j["bounds"] = std::move(fams);
  j["u_channels"] = cfg.u_channels;
  j["ws_channels"] = cfg.ws_channels;
  j["y_channels"] = cfg.y_channels;
  j["svd_tol"] = cfg.svd_tol;
  j["rank_tol"] = cfg.rank_tol;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.T = j.at("T").get<Index>();
  cfg.N = j.at("N").get<Index>();
  cfg.lag = j.value("lag", Index{4});
  cfg.stride = j.value("stride", Index{1});
  cfg.gamma = j.value("gamma", 0.9);
  if (j.contains("bounds")) {
    cfg.bounds.clear();
    for (const auto& name : j.at("bounds")) {
      cfg.bounds.push_back(bound_family_from_string(name.get<std::string>()));
    }
  }
  cfg.u_channels = j.value("u_channels", std::vector<std::string>{});
  cfg.ws_channels = j.value("ws_channels", std::vector<std::string>{});
  cfg.y_channels = j.value("y_channels", std::vector<std::string>{});
  cfg.svd_tol = j.value("svd_tol", -1.0);
  cfg.rank_tol = j.value("rank_tol", 1e-8);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.out_dir = j.value("out_dir", std::string("out"));
  cfg.threads = j.value("threads", 1);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << file.rdbuf();
  return config_from_json(ss.str());
}

Dataset select_structured(const Dataset& ds, const std::vector<std::string>& ws_names) {
  Dataset out = ds;
  out.ws.resize(static_cast<Index>(ws_names.size()), ds.size());
  out.names.ws = ws_names;
  for (Index i = 0; i < static_cast<Index>(ws_names.size()); ++i) {
    const auto& name = ws_names[static_cast<std::size_t>(i)];
    const auto it = std::find(ds.names.ws.begin(), ds.names.ws.end(), name);
    if (it == ds.names.ws.end()) {
      throw SchemaError("structured-disturbance channel '" + name +
                        "' not present in the dataset");
    }
    out.ws.row(i) = ds.ws.row(it - ds.names.ws.begin());
  }
  return out;
}

std::pair<std::vector<ScenarioResult>, SummaryReport> run(const ExperimentConfig& cfg,
                                                          const Dataset& ds) {
  cfg.validate();
  const Dataset eff = select_structured(ds, cfg.ws_channels);

  std::vector<Index> anchors;
  for (Index t = cfg.T + cfg.lag; t + cfg.N <= eff.size(); t += cfg.stride) {
    anchors.push_back(t);
  }
  if (anchors.empty()) {
    throw ValidationError("dataset of length " + std::to_string(eff.size()) +
                          " is too short for one window (need " +
                          std::to_string(cfg.T + cfg.lag + cfg.N) + " samples)");
  }

  std::vector<ScenarioResult> results(anchors.size());
  if (cfg.threads <= 1) {
    for (std::size_t i = 0; i < anchors.size(); ++i) {
      results[i] = run_scenario(cfg, eff, anchors[i]);
    }
  } else {
    const int workers = std::min<int>(cfg.threads, static_cast<int>(anchors.size()));
    std::vector<std::future<void>> jobs;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= anchors.size()) return;
          results[i] = run_scenario(cfg, eff, anchors[i]);
        }
      }));
    }
    for (auto& j : jobs) j.get();
  }
  return {results, summarize(results, cfg)};
}

SummaryReport summarize(const std::vector<ScenarioResult>& results,
                        const ExperimentConfig& cfg) {
  SummaryReport rep;
  rep.config = cfg;

  double sq_err = 0.0;
  double sq_err_sp = 0.0;
  std::map<BoundFamily, double> hit, rad_sum;
  for (BoundFamily f : cfg.bounds) {
    hit[f] = 0.0;
    rad_sum[f] = 0.0;
  }
  Index cells = 0;  // (scenario, step, output) triples
  for (const ScenarioResult& r : results) {
    if (r.skipped) {
      ++rep.skipped_count;
      continue;
    }
    ++rep.scenario_count;
    sq_err += (r.mean - r.truth).squaredNorm();
    sq_err_sp += (r.subspace - r.truth).squaredNorm();
    cells += r.mean.size();
    for (BoundFamily f : cfg.bounds) {
      const Matrix& rad = r.radii.at(f);
      hit[f] += ((r.truth - r.mean).cwiseAbs().array() <= rad.array())
                    .cast<double>()
                    .sum();
      rad_sum[f] += rad.sum();
    }
  }
  if (rep.scenario_count > 0) {
    const double denom = static_cast<double>(rep.scenario_count * cfg.N);
    rep.rmse = std::sqrt(sq_err / denom);
    rep.rmse_subspace = std::sqrt(sq_err_sp / denom);
    for (BoundFamily f : cfg.bounds) {
      rep.per_bound[f] = {hit[f] / static_cast<double>(cells),
                          rad_sum[f] / static_cast<double>(cells)};
    }
  }
  return rep;
}

void emit_reports(const std::vector<ScenarioResult>& results,
                  const SummaryReport& report, const std::string& outdir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create directory '" + outdir + "'");

  const ExperimentConfig& cfg = report.config;

  {
    const std::string path = outdir + "/config.json";
    std::ofstream file(path);
    if (!file) throw IoError("cannot write '" + path + "'");
    file << config_to_json(cfg) << '\n';
  }

  {
    const std::string path = outdir + "/scenarios.csv";
    std::ofstream file(path);
    if (!file) throw IoError("cannot write '" + path + "'");
    file << "t,k,output,truth,mean,subspace";
    for (BoundFamily f : cfg.bounds) file << ",radius_" << to_string(f);
    file << '\n';
    for (const ScenarioResult& r : results) {
      if (r.skipped) continue;
      for (Index k = 0; k < r.mean.cols(); ++k) {
        for (Index i = 0; i < r.mean.rows(); ++i) {
          file << r.t << ',' << k << ',' << i << ',' << fmt(r.truth(i, k)) << ','
               << fmt(r.mean(i, k)) << ',' << fmt(r.subspace(i, k));
          for (BoundFamily f : cfg.bounds) file << ',' << fmt(r.radii.at(f)(i, k));
          file << '\n';
        }
      }
    }
    if (!file) throw IoError("write failed for '" + path + "'");
  }

  {
    ordered_json j;
    j["config"] = ordered_json::parse(config_to_json(cfg));
    j["scenario_count"] = report.scenario_count;
    j["skipped_count"] = report.skipped_count;
    ordered_json skipped = ordered_json::array();
    for (const ScenarioResult& r : results) {
      if (!r.skipped) continue;
      ordered_json item;
      item["t"] = r.t;
      item["reason"] = r.skip_reason;
      skipped.push_back(std::move(item));
    }
    j["skipped"] = std::move(skipped);
    j["rmse"] = report.rmse ? ordered_json(*report.rmse) : ordered_json(nullptr);
    j["rmse_subspace"] = report.rmse_subspace ? ordered_json(*report.rmse_subspace)
                                              : ordered_json(nullptr);
    ordered_json fams;
    for (BoundFamily f : cfg.bounds) {
      ordered_json entry;
      if (report.per_bound.count(f)) {
        entry["coverage"] = report.per_bound.at(f).coverage;
        entry["mean_radius"] = report.per_bound.at(f).mean_radius;
      } else {
        entry["coverage"] = nullptr;
        entry["mean_radius"] = nullptr;
      }
      fams[to_string(f)] = std::move(entry);
    }
    j["bounds"] = std::move(fams);

    const std::string path = outdir + "/summary.json";
    std::ofstream file(path);
    if (!file) throw IoError("cannot write '" + path + "'");
    file << j.dump(2) << '\n';
    if (!file) throw IoError("write failed for '" + path + "'");
  }
}

}  // namespace respred
