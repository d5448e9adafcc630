#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rissim {

struct MetricsRecord {
  std::string experiment;
  std::string scheme;
  std::string sweep_name;
  double sweep_value = 0.0;
  int trials = 0;
  std::string metric_name;
  double metric_value = 0.0;
  double ci_halfwidth = 0.0;
  std::uint64_t seed = 0;
  long long pilot_samples_used = 0;

  bool operator==(const MetricsRecord&) const = default;
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string to_csv(const std::vector<MetricsRecord>& records);
void write_csv(const std::vector<MetricsRecord>& records, const std::string& path);
std::vector<MetricsRecord> parse_csv(const std::string& text);
std::vector<MetricsRecord> read_csv(const std::string& path);

/// Path of the sidecar manifest for a CSV path.
std::string manifest_path(const std::string& csv_path);

struct Summary {
  double mean = 0.0;
  double ci_halfwidth = 0.0;
};

/// Mean and 1.96 * standard error of per-trial values (NaN entries are dropped).
Summary summarize(const std::vector<double>& values);

}  // namespace rissim
