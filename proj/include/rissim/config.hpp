#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rissim/channel.hpp"
#include "rissim/core.hpp"
#include "rissim/ris_opt.hpp"

namespace rissim {

enum class Experiment { kNmseCfo, kNmseCir, kRate, kBer, kCfoSensitivity, kKappa };
enum class BudgetPolicy { kNative, kMatched };

std::string experiment_name(Experiment e);
/// Accepts both "nmse-cfo" and "nmse_cfo" spellings.
Experiment parse_experiment(const std::string& name);

/// Geometry keys given explicitly in the config; everything else follows the defaults.
struct GeometryOverrides {
  std::optional<Point3> ris_midpoint;
  std::optional<double> ris_spacing;
  std::optional<std::pair<int, int>> ris_grid;
  std::optional<Point3> bs_midpoint;
  std::optional<double> bs_spacing;
  std::optional<std::vector<Point3>> user_positions;
  std::optional<double> tx_gain;
  std::optional<double> rx_gain;

  Geometry resolve(const SystemConfig& config) const;
};

struct ExperimentSpec {
  Experiment experiment = Experiment::kNmseCir;
  std::vector<Scheme> schemes;
  std::string sweep;
  std::vector<double> sweep_values;
  int trials = 200;
  SystemConfig base;
  GeometryOverrides geometry;
  PgmParams pgm;
  BudgetPolicy budget = BudgetPolicy::kNative;
  bool noise_var_given = false;
  double cfo_variance = 1e-4;
  double eb_n0_db = 10.0;
  int grid_levels = 64;
  int workers = 1;

  /// System configuration at one sweep value.
  SystemConfig config_at(double sweep_value) const;
  double cfo_variance_at(double sweep_value) const;
  double eb_n0_at(double sweep_value) const;
  /// Throws ConfigError naming the violated constraint.
  void validate() const;
  void validate_point(double sweep_value) const;
};

/// Defaults for an experiment: scheme list and sweep.
ExperimentSpec default_spec(Experiment experiment);

/// Apply one key/value pair; value is JSON text or a bare string.
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);

ExperimentSpec load_config(const std::string& path, Experiment experiment,
                           const std::vector<std::string>& overrides = {});
ExperimentSpec load_config(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text, Experiment experiment,
                                 const std::vector<std::string>& overrides = {});

/// All resolved parameters as JSON text (used in the manifest).
std::string describe_spec(const ExperimentSpec& spec);

}  // namespace rissim
