#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "respred/bounds.hpp"
#include "respred/dataset.hpp"
#include "respred/errors.hpp"
#include "respred/types.hpp"

namespace respred {

/// Rolling-horizon experiment configuration. `ws_channels` selects which of
/// the dataset's structured-disturbance channels enter the exogenous signal;
/// everything not selected is left to the residual process. `u_channels` and
/// `y_channels` name the CSV columns when a file is loaded through run_csv.
struct ExperimentConfig {
  Index T = 0;             ///< estimation window length
  Index N = 0;             ///< prediction horizon
  Index lag = 4;
  Index stride = 1;        ///< steps between scenario anchors
  double gamma = 0.9;
  std::vector<BoundFamily> bounds = {BoundFamily::cheb2, BoundFamily::cheb4,
                                     BoundFamily::gauss};
  std::vector<std::string> u_channels;
  std::vector<std::string> ws_channels;
  std::vector<std::string> y_channels;
  double svd_tol = -1.0;
  double rank_tol = 1e-8;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int threads = 1;

  void validate() const;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Per-scenario prediction record. Matrices are n_out x N with one column per
/// future step. A scenario that failed its excitation or rank checks is kept
/// with skipped = true and empty matrices.
struct ScenarioResult {
  Index t = 0;
  Matrix mean;      ///< causal mean trajectory
  Matrix subspace;  ///< subspace trajectory
  Matrix truth;
  std::map<BoundFamily, Matrix> radii;
  bool skipped = false;
  std::string skip_reason;
};

struct FamilySummary {
  double coverage = 0.0;
  double mean_radius = 0.0;
};

struct SummaryReport {
  std::optional<double> rmse;           ///< causal predictor
  std::optional<double> rmse_subspace;
  std::map<BoundFamily, FamilySummary> per_bound;
  Index scenario_count = 0;  ///< effective (non-skipped) scenarios
  Index skipped_count = 0;
  ExperimentConfig config;
};

/// Drops unselected structured-disturbance channels from a dataset.
Dataset select_structured(const Dataset& ds, const std::vector<std::string>& ws_names);

/// Runs every window anchored at t = T + lag, T + lag + stride, ... while
/// t + N fits in the dataset: estimates the residual model, builds both
/// predictors, propagates moments and evaluates each bound family.
std::pair<std::vector<ScenarioResult>, SummaryReport> run(const ExperimentConfig& cfg,
                                                          const Dataset& ds);

/// Aggregates scenario results into the summary metrics: overall RMSE,
/// per-family empirical coverage and mean radius.
SummaryReport summarize(const std::vector<ScenarioResult>& results,
                        const ExperimentConfig& cfg);

/// Writes summary.json, scenarios.csv (one row per scenario/step/output) and
/// config.json under outdir with stable field ordering.
void emit_reports(const std::vector<ScenarioResult>& results,
                  const SummaryReport& report, const std::string& outdir);

}  // namespace respred
