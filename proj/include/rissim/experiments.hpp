#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rissim/config.hpp"
#include "rissim/records.hpp"

namespace rissim {

/// Run fn(i) for i in [0, n) on `workers` threads; results must be written by index.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Pilot samples one arm consumes for CIR/CFO training.
long long pilot_samples(Scheme scheme, bool with_preamble, const SystemConfig& config,
                        BudgetPolicy policy);

struct RunLog {
  std::vector<std::string> messages;
  /// "sweep_index/scheme" -> noise variance used, for the manifest.
  std::vector<std::pair<std::string, double>> calibration;
};

std::vector<MetricsRecord> run_nmse_experiment(const ExperimentSpec& spec, RunLog* log = nullptr);
std::vector<MetricsRecord> run_rate_experiment(const ExperimentSpec& spec, RunLog* log = nullptr);
std::vector<MetricsRecord> run_ber_experiment(const ExperimentSpec& spec, RunLog* log = nullptr);
std::vector<MetricsRecord> run_kappa_experiment(const ExperimentSpec& spec, RunLog* log = nullptr);
std::vector<MetricsRecord> run_experiment(const ExperimentSpec& spec, RunLog* log = nullptr);

void write_manifest(const ExperimentSpec& spec, const RunLog& log, const std::string& csv_path);

}  // namespace rissim
