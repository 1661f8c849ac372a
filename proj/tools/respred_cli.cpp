#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "respred/acceptance.hpp"
#include "respred/respred.hpp"

namespace {

using respred::BoundFamily;
using respred::ChannelSchema;
using respred::Dataset;
using respred::ExperimentConfig;

const char* error_kind(const std::exception& e) {
  using namespace respred;
  if (dynamic_cast<const SchemaError*>(&e)) return "schema";
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const BoundsError*>(&e)) return "bounds";
  if (dynamic_cast<const DegeneracyError*>(&e)) return "degeneracy";
  if (dynamic_cast<const ExcitationError*>(&e)) return "excitation";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const UnsupportedOrderError*>(&e)) return "unsupported_order";
  if (dynamic_cast<const GenerationError*>(&e)) return "generation";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  return "error";
}

struct RunArgs {
  std::string data_path;
  std::string config_path;
  std::string bounds_csv;
  std::string ws_csv;
  std::string u_csv;
  std::string y_csv;
  ExperimentConfig inline_cfg;
  bool has_T = false, has_N = false, has_lag = false, has_stride = false;
  bool has_gamma = false, has_seed = false, has_out = false, has_threads = false;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int cmd_run(const RunArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = respred::load_config(args.config_path);
  if (args.has_T) cfg.T = args.inline_cfg.T;
  if (args.has_N) cfg.N = args.inline_cfg.N;
  if (args.has_lag) cfg.lag = args.inline_cfg.lag;
  if (args.has_stride) cfg.stride = args.inline_cfg.stride;
  if (args.has_gamma) cfg.gamma = args.inline_cfg.gamma;
  if (args.has_seed) cfg.seed = args.inline_cfg.seed;
  if (args.has_out) cfg.out_dir = args.inline_cfg.out_dir;
  if (args.has_threads) cfg.threads = args.inline_cfg.threads;
  if (!args.bounds_csv.empty()) {
    cfg.bounds.clear();
    for (const auto& name : split_csv(args.bounds_csv)) {
      cfg.bounds.push_back(respred::bound_family_from_string(name));
    }
  }
  if (!args.u_csv.empty()) cfg.u_channels = split_csv(args.u_csv);
  if (!args.y_csv.empty()) cfg.y_channels = split_csv(args.y_csv);
  if (!args.ws_csv.empty()) {
    cfg.ws_channels = args.ws_csv == "none" ? std::vector<std::string>{}
                                            : split_csv(args.ws_csv);
  }
  cfg.validate();
  if (cfg.u_channels.empty() || cfg.y_channels.empty()) {
    throw respred::ValidationError(
        "u_channels and y_channels must name the dataset columns (config file or "
        "--u-channels/--y-channels)");
  }

  const ChannelSchema schema{cfg.u_channels, cfg.ws_channels, cfg.y_channels};
  const Dataset ds = respred::load_csv(args.data_path, schema);
  const auto [results, report] = respred::run(cfg, ds);
  respred::emit_reports(results, report, cfg.out_dir);

  std::cout << "scenarios " << report.scenario_count << " (skipped "
            << report.skipped_count << ")";
  if (report.rmse) {
    std::printf(", rmse %.6g, subspace rmse %.6g", *report.rmse,
                *report.rmse_subspace);
  }
  std::cout << "\nreports written to " << cfg.out_dir << '\n';
  return 0;
}

int cmd_synth(const std::string& system_path, long long steps, std::uint64_t seed,
              const std::string& out_path, const std::string& noise_path, double dt) {
  const respred::TruthSystem truth = respred::load_truth(system_path);
  const respred::Index dim = std::holds_alternative<respred::ArxTruth>(truth)
                                 ? std::get<respred::ArxTruth>(truth).n_exog()
                                 : std::get<respred::StateSpaceTruth>(truth).n_exog();
  const respred::Matrix inputs = respred::random_uniform_inputs(
      dim, static_cast<respred::Index>(steps), respred::derive_seed(seed, "inputs"));
  const respred::SimResult sim =
      std::holds_alternative<respred::ArxTruth>(truth)
          ? respred::simulate(std::get<respred::ArxTruth>(truth), inputs, seed, dt)
          : respred::simulate(std::get<respred::StateSpaceTruth>(truth), inputs, seed, dt);
  respred::write_csv(sim.data, out_path);
  if (!noise_path.empty()) {
    Dataset noise_ds;
    noise_ds.timestamps = sim.data.timestamps;
    noise_ds.sample_period = sim.data.sample_period;
    noise_ds.u.resize(0, sim.noise.cols());
    noise_ds.ws.resize(0, sim.noise.cols());
    noise_ds.y = sim.noise;
    for (respred::Index i = 0; i < sim.noise.rows(); ++i) {
      noise_ds.names.y.push_back("v" + std::to_string(i + 1));
    }
    respred::write_csv(noise_ds, noise_path);
  }
  std::cout << "wrote " << sim.data.size() << " steps to " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven stochastic output prediction under residual disturbances"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Rolling-horizon prediction experiment");
  run->add_option("--data", run_args.data_path, "Dataset CSV")->required();
  run->add_option("--config", run_args.config_path, "Experiment config JSON");
  run->add_option("--T", run_args.inline_cfg.T, "Estimation window length")
      ->each([&](const std::string&) { run_args.has_T = true; });
  run->add_option("--N", run_args.inline_cfg.N, "Prediction horizon")
      ->each([&](const std::string&) { run_args.has_N = true; });
  run->add_option("--lag", run_args.inline_cfg.lag, "Model lag")
      ->each([&](const std::string&) { run_args.has_lag = true; });
  run->add_option("--stride", run_args.inline_cfg.stride, "Steps between scenarios")
      ->each([&](const std::string&) { run_args.has_stride = true; });
  run->add_option("--gamma", run_args.inline_cfg.gamma, "Confidence level")
      ->each([&](const std::string&) { run_args.has_gamma = true; });
  run->add_option("--bounds", run_args.bounds_csv,
                  "Comma list from cheb2,cheb4,gauss");
  run->add_option("--u-channels", run_args.u_csv, "Comma list of input columns");
  run->add_option("--ws-channels", run_args.ws_csv,
                  "Comma list of structured-disturbance columns ('none' for empty)");
  run->add_option("--y-channels", run_args.y_csv, "Comma list of output columns");
  run->add_option("--seed", run_args.inline_cfg.seed, "Root seed")
      ->each([&](const std::string&) { run_args.has_seed = true; });
  run->add_option("--out", run_args.inline_cfg.out_dir, "Report directory")
      ->each([&](const std::string&) { run_args.has_out = true; });
  run->add_option("--threads", run_args.inline_cfg.threads, "Scenario workers")
      ->each([&](const std::string&) { run_args.has_threads = true; });

  std::string system_path, out_path, noise_path;
  long long steps = 0;
  std::uint64_t synth_seed = 0;
  double dt = 1.0;
  auto* synth = app.add_subcommand("synth", "Simulate a truth system to CSV");
  synth->add_option("--system", system_path, "Truth-system JSON")->required();
  synth->add_option("--steps", steps, "Number of samples")->required();
  synth->add_option("--seed", synth_seed, "Root seed");
  synth->add_option("--out", out_path, "Output CSV path")->required();
  synth->add_option("--noise-out", noise_path, "Optional realized-disturbance CSV");
  synth->add_option("--dt", dt, "Sample period in seconds");

  std::string check_data, check_config;
  auto* check = app.add_subcommand("check", "Run the acceptance property suite");
  check->add_option("--data", check_data, "Optional dataset CSV for the pipeline check");
  check->add_option("--config", check_config, "Config JSON matching --data");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (synth->parsed()) {
      return cmd_synth(system_path, steps, synth_seed, out_path, noise_path, dt);
    }
    return respred::accept::run_and_print(std::cout, check_data, check_config);
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = error_kind(e);
    err["message"] = e.what();
    std::cerr << err.dump() << '\n';
    return 1;
  }
}
