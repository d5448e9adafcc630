#include "rissim/records.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rissim/errors.hpp"

namespace rissim {

namespace {

const char* kHeader =
    "experiment,scheme,sweep_name,sweep_value,trials,metric_name,metric_value,ci_halfwidth,seed,"
    "pilot_samples_used";

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("malformed number in CSV: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string to_csv(const std::vector<MetricsRecord>& records) {
  std::ostringstream os;
  os << kHeader << '\n';
  for (const auto& r : records) {
    os << quote(r.experiment) << ',' << quote(r.scheme) << ',' << quote(r.sweep_name) << ','
       << format_double(r.sweep_value) << ',' << r.trials << ',' << quote(r.metric_name) << ','
       << format_double(r.metric_value) << ',' << format_double(r.ci_halfwidth) << ','
       << r.seed << ',' << r.pilot_samples_used << '\n';
  }
  return os.str();
}

void write_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_csv(records);
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<MetricsRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ConfigError("unexpected CSV header");
  std::vector<MetricsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 10) throw ConfigError("CSV row with " + std::to_string(f.size()) + " fields");
    MetricsRecord r;
    r.experiment = f[0];
    r.scheme = f[1];
    r.sweep_name = f[2];
    r.sweep_value = parse_number<double>(f[3]);
    r.trials = parse_number<int>(f[4]);
    r.metric_name = f[5];
    r.metric_value = parse_number<double>(f[6]);
    r.ci_halfwidth = parse_number<double>(f[7]);
    r.seed = parse_number<std::uint64_t>(f[8]);
    r.pilot_samples_used = parse_number<long long>(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricsRecord> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

std::string manifest_path(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of('/');
  const auto dot = csv_path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    return csv_path.substr(0, dot) + ".manifest";
  return csv_path + ".manifest";
}

Summary summarize(const std::vector<double>& values) {
  double sum = 0.0;
  int n = 0;
  for (double v : values)
    if (!std::isnan(v)) {
      sum += v;
      ++n;
    }
  if (n == 0) return {std::nan(""), std::nan("")};
  const double mean = sum / n;
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(n))};
}

}  // namespace rissim
