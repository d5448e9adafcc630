// Command-line front end for the Monte Carlo experiments.
#include <CLI11.hpp>
#include <iostream>

#include "rissim/config.hpp"
#include "rissim/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"RIS-aided multi-user OFDM uplink simulator"};
  std::string experiment;
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int trials = 0;
  int workers = 0;

  app.add_option("experiment", experiment,
                 "nmse-cfo, nmse-cir, rate, ber, cfo-sensitivity or kappa")
      ->required();
  app.add_option("--config", config_path, "flat JSON key/value file")->required();
  app.add_option("--override", overrides, "key=value, applied after the file")
      ->allow_extra_args(false);
  app.add_option("--out", out_path, "CSV output path")->required();
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  auto* trials_opt = app.add_option("--trials", trials, "Monte Carlo trials per point");
  auto* workers_opt = app.add_option("--workers", workers, "worker threads");
  CLI11_PARSE(app, argc, argv);

  try {
    const rissim::Experiment e = rissim::parse_experiment(experiment);
    std::vector<std::string> all = overrides;
    if (seed_opt->count()) all.push_back("master_seed=" + std::to_string(seed));
    if (trials_opt->count()) all.push_back("trials=" + std::to_string(trials));
    if (workers_opt->count()) all.push_back("workers=" + std::to_string(workers));
    const rissim::ExperimentSpec spec = rissim::load_config(config_path, e, all);
    rissim::RunLog log;
    const auto records = rissim::run_experiment(spec, &log);
    rissim::write_csv(records, out_path);
    rissim::write_manifest(spec, log, out_path);
    for (const auto& m : log.messages) std::cerr << m << '\n';
  } catch (const std::exception& ex) {
    std::cerr << "simulate: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
