#include "rissim/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rissim/airlink.hpp"

namespace rissim {

using nlohmann::json;

namespace {

std::string normalize(std::string name) {
  for (char& c : name) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return name;
}

double as_double(const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    try {
      std::size_t pos = 0;
      const double d = std::stod(s, &pos);
      if (pos == s.size()) return d;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("key '" + key + "' expects a number");
}

long long as_integer(const json& v, const std::string& key) {
  const double d = as_double(v, key);
  if (std::floor(d) != d) throw ConfigError("key '" + key + "' expects an integer");
  return static_cast<long long>(d);
}

int as_int(const json& v, const std::string& key) {
  return static_cast<int>(as_integer(v, key));
}

std::uint64_t as_seed(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
  if (v.is_string()) {
    try {
      std::size_t pos = 0;
      const auto s = v.get<std::string>();
      const auto u = std::stoull(s, &pos);
      if (pos == s.size()) return u;
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("key '" + key + "' expects an unsigned 64-bit integer");
}

Point3 as_point(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError("key '" + key + "' expects [x, y, z]");
  return {as_double(v[0], key), as_double(v[1], key), as_double(v[2], key)};
}

json point_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

void set_int_field(SystemConfig& c, const std::string& key, int v) {
  if (key == "N") c.subcarriers = v;
  else if (key == "K") c.users = v;
  else if (key == "L") c.taps = v;
  else if (key == "L_cp") c.cp_length = v;
  else if (key == "M") c.antennas = v;
  else if (key == "R") c.ris_elements = v;
}

bool is_int_field(const std::string& key) {
  return key == "N" || key == "K" || key == "L" || key == "L_cp" || key == "M" || key == "R";
}

bool is_sweepable(const std::string& key) {
  return is_int_field(key) || key == "snr_db" || key == "kappa_db" || key == "tx_power" ||
         key == "upsilon" || key == "cfo_variance" || key == "eb_n0_db";
}

void apply_json(ExperimentSpec& spec, const std::string& key, const json& v) {
  SystemConfig& c = spec.base;
  GeometryOverrides& g = spec.geometry;
  if (is_int_field(key)) {
    set_int_field(c, key, as_int(v, key));
  } else if (key == "snr_db") {
    c.snr_db = as_double(v, key);
  } else if (key == "tx_power") {
    c.tx_power = as_double(v, key);
  } else if (key == "noise_var") {
    c.noise_var = as_double(v, key);
    spec.noise_var_given = true;
  } else if (key == "upsilon") {
    c.upsilon = as_double(v, key);
  } else if (key == "carrier_freq_hz") {
    c.carrier_freq_hz = as_double(v, key);
  } else if (key == "master_seed") {
    c.master_seed = as_seed(v, key);
  } else if (key == "kappa_db") {
    c.kappa_db = as_double(v, key);
  } else if (key == "ris_midpoint") {
    g.ris_midpoint = as_point(v, key);
  } else if (key == "ris_spacing") {
    g.ris_spacing = as_double(v, key);
  } else if (key == "ris_grid") {
    if (!v.is_array() || v.size() != 2) throw ConfigError("key 'ris_grid' expects [rows, cols]");
    g.ris_grid = std::make_pair(as_int(v[0], key), as_int(v[1], key));
  } else if (key == "bs_midpoint") {
    g.bs_midpoint = as_point(v, key);
  } else if (key == "bs_spacing") {
    g.bs_spacing = as_double(v, key);
  } else if (key == "user_positions") {
    if (!v.is_array()) throw ConfigError("key 'user_positions' expects a list of [x, y, z]");
    std::vector<Point3> pts;
    for (const auto& p : v) pts.push_back(as_point(p, key));
    g.user_positions = pts;
  } else if (key == "tx_gain") {
    g.tx_gain = as_double(v, key);
  } else if (key == "rx_gain") {
    g.rx_gain = as_double(v, key);
  } else if (key == "mu0") {
    spec.pgm.mu0 = as_double(v, key);
  } else if (key == "rho") {
    spec.pgm.rho = as_double(v, key);
  } else if (key == "delta_phi") {
    spec.pgm.delta_phi = as_double(v, key);
  } else if (key == "max_iters") {
    spec.pgm.max_iters = as_int(v, key);
  } else if (key == "tol") {
    spec.pgm.tol = as_double(v, key);
  } else if (key == "max_backtracks") {
    spec.pgm.max_backtracks = as_int(v, key);
  } else if (key == "experiment") {
    if (!v.is_string()) throw ConfigError("key 'experiment' expects a name");
    if (parse_experiment(v.get<std::string>()) != spec.experiment)
      throw ConfigError("key 'experiment' names " + v.get<std::string>() +
                        " but the run is " + experiment_name(spec.experiment));
  } else if (key == "schemes" || key == "scheme") {
    std::vector<Scheme> s;
    if (v.is_string()) {
      s.push_back(parse_scheme(v.get<std::string>()));
    } else if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_string()) throw ConfigError("key 'schemes' expects scheme names");
        s.push_back(parse_scheme(e.get<std::string>()));
      }
    } else {
      throw ConfigError("key 'schemes' expects a list of scheme names");
    }
    spec.schemes = s;
  } else if (key == "sweep") {
    if (!v.is_string()) throw ConfigError("key 'sweep' expects a parameter name");
    spec.sweep = v.get<std::string>();
  } else if (key == "sweep_values") {
    std::vector<double> vals;
    if (v.is_array()) {
      for (const auto& e : v) vals.push_back(as_double(e, key));
    } else {
      vals.push_back(as_double(v, key));
    }
    spec.sweep_values = vals;
  } else if (key == "trials") {
    spec.trials = as_int(v, key);
  } else if (key == "pilot_budget_policy") {
    const std::string p = v.is_string() ? normalize(v.get<std::string>()) : "";
    if (p == "native") spec.budget = BudgetPolicy::kNative;
    else if (p == "matched") spec.budget = BudgetPolicy::kMatched;
    else throw ConfigError("key 'pilot_budget_policy' expects native or matched");
  } else if (key == "cfo_variance") {
    spec.cfo_variance = as_double(v, key);
  } else if (key == "eb_n0_db") {
    spec.eb_n0_db = as_double(v, key);
  } else if (key == "grid_levels") {
    spec.grid_levels = as_int(v, key);
  } else if (key == "workers") {
    spec.workers = as_int(v, key);
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

json parse_json_object(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a flat key/value object");
  return doc;
}

}  // namespace

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::kNmseCfo: return "nmse_cfo";
    case Experiment::kNmseCir: return "nmse_cir";
    case Experiment::kRate: return "rate";
    case Experiment::kBer: return "ber";
    case Experiment::kCfoSensitivity: return "cfo_sensitivity";
    case Experiment::kKappa: return "kappa";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  const std::string n = normalize(name);
  if (n == "nmse_cfo") return Experiment::kNmseCfo;
  if (n == "nmse_cir") return Experiment::kNmseCir;
  if (n == "rate") return Experiment::kRate;
  if (n == "ber") return Experiment::kBer;
  if (n == "cfo_sensitivity") return Experiment::kCfoSensitivity;
  if (n == "kappa") return Experiment::kKappa;
  throw ConfigError("unknown experiment '" + name + "'");
}

Geometry GeometryOverrides::resolve(const SystemConfig& config) const {
  Geometry g = Geometry::defaults(config);
  if (ris_midpoint) g.ris_midpoint = *ris_midpoint;
  if (ris_spacing) g.ris_spacing = *ris_spacing;
  if (ris_grid) g.ris_grid = *ris_grid;
  if (bs_midpoint) g.bs_midpoint = *bs_midpoint;
  if (bs_spacing) g.bs_spacing = *bs_spacing;
  if (user_positions) g.user_positions = *user_positions;
  if (tx_gain) g.tx_gain = *tx_gain;
  if (rx_gain) g.rx_gain = *rx_gain;
  return g;
}

SystemConfig ExperimentSpec::config_at(double v) const {
  SystemConfig c = base;
  if (sweep.empty()) return c;
  if (is_int_field(sweep)) {
    if (std::floor(v) != v) throw ConfigError("sweep over '" + sweep + "' needs integer values");
    set_int_field(c, sweep, static_cast<int>(v));
  } else if (sweep == "snr_db") {
    c.snr_db = v;
  } else if (sweep == "kappa_db") {
    c.kappa_db = v;
  } else if (sweep == "tx_power") {
    c.tx_power = v;
  } else if (sweep == "upsilon") {
    c.upsilon = v;
  }
  return c;
}

double ExperimentSpec::cfo_variance_at(double v) const {
  return sweep == "cfo_variance" ? v : cfo_variance;
}

double ExperimentSpec::eb_n0_at(double v) const { return sweep == "eb_n0_db" ? v : eb_n0_db; }

void ExperimentSpec::validate_point(double v) const {
  const SystemConfig c = config_at(v);
  c.validate();
  for (Scheme s : schemes) c.validate_for(s, frame_length(s, c));
  geometry.resolve(c).validate(c);
  const double var = cfo_variance_at(v);
  if (!(var >= 0.0)) throw ConfigError("constraint violated: cfo_variance >= 0");
}

void ExperimentSpec::validate() const {
  if (schemes.empty()) throw ConfigError("constraint violated: at least one scheme");
  if (trials < 1) throw ConfigError("constraint violated: trials >= 1");
  if (workers < 1) throw ConfigError("constraint violated: workers >= 1");
  if (grid_levels < 2) throw ConfigError("constraint violated: grid_levels >= 2");
  if (!sweep.empty() && !is_sweepable(sweep))
    throw ConfigError("sweep parameter '" + sweep + "' is not sweepable");
  if (!sweep.empty() && sweep_values.empty()) throw ConfigError("sweep needs sweep_values");
  pgm.validate();
  base.validate();
  for (Scheme s : schemes) base.validate_for(s, frame_length(s, base));
  geometry.resolve(base).validate(base);
  if (!(cfo_variance >= 0.0)) throw ConfigError("constraint violated: cfo_variance >= 0");
}

ExperimentSpec default_spec(Experiment experiment) {
  ExperimentSpec spec;
  spec.experiment = experiment;
  spec.schemes = {Scheme::kProposed, Scheme::kTdma, Scheme::kOfdma};
  switch (experiment) {
    case Experiment::kNmseCfo:
    case Experiment::kNmseCir:
      spec.sweep = "M";
      spec.sweep_values = {4, 16, 64};
      break;
    case Experiment::kCfoSensitivity:
      spec.schemes = {Scheme::kOfdma};
      spec.sweep = "cfo_variance";
      spec.sweep_values = {1e-8, 1e-6, 1e-4};
      break;
    case Experiment::kRate:
      spec.sweep = "R";
      spec.sweep_values = {2, 5, 8};
      spec.trials = 100;
      break;
    case Experiment::kBer:
      spec.sweep = "eb_n0_db";
      spec.sweep_values = {0, 5, 10, 15};
      spec.base.antennas = 20;
      break;
    case Experiment::kKappa:
      spec.schemes = {Scheme::kProposed};
      spec.sweep = "kappa_db";
      spec.sweep_values = {-10, -4, 4, 12, 20};
      break;
  }
  return spec;
}

void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value) {
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  apply_json(spec, key, v);
}

ExperimentSpec parse_config_text(const std::string& text, Experiment experiment,
                                 const std::vector<std::string>& overrides) {
  const json doc = parse_json_object(text);
  ExperimentSpec spec = default_spec(experiment);
  for (const auto& [key, value] : doc.items()) apply_json(spec, key, value);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + o + "' must look like key=value");
    apply_setting(spec, o.substr(0, eq), o.substr(eq + 1));
  }
  spec.validate();
  return spec;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ExperimentSpec load_config(const std::string& path, Experiment experiment,
                           const std::vector<std::string>& overrides) {
  return parse_config_text(read_file(path), experiment, overrides);
}

ExperimentSpec load_config(const std::string& path) {
  const std::string text = read_file(path);
  const json doc = parse_json_object(text);
  Experiment e = Experiment::kNmseCir;
  if (doc.contains("experiment") && doc["experiment"].is_string())
    e = parse_experiment(doc["experiment"].get<std::string>());
  return parse_config_text(text, e);
}

std::string describe_spec(const ExperimentSpec& spec) {
  const SystemConfig& c = spec.base;
  const Geometry g = spec.geometry.resolve(c);
  json schemes = json::array();
  for (Scheme s : spec.schemes) schemes.push_back(scheme_name(s));
  json users = json::array();
  for (const auto& p : g.user_positions) users.push_back(point_json(p));
  json doc = {
      {"experiment", experiment_name(spec.experiment)},
      {"schemes", schemes},
      {"sweep", spec.sweep},
      {"sweep_values", spec.sweep_values},
      {"trials", spec.trials},
      {"pilot_budget_policy", spec.budget == BudgetPolicy::kNative ? "native" : "matched"},
      {"cfo_variance", spec.cfo_variance},
      {"eb_n0_db", spec.eb_n0_db},
      {"grid_levels", spec.grid_levels},
      {"workers", spec.workers},
      {"N", c.subcarriers},
      {"K", c.users},
      {"L", c.taps},
      {"L_cp", c.cp_length},
      {"M", c.antennas},
      {"R", c.ris_elements},
      {"snr_db", c.snr_db},
      {"tx_power", c.tx_power},
      {"noise_var", spec.noise_var_given ? json(c.noise_var) : json("calibrated")},
      {"upsilon", c.upsilon},
      {"carrier_freq_hz", c.carrier_freq_hz},
      {"master_seed", c.master_seed},
      {"kappa_db", c.kappa_db},
      {"ris_midpoint", point_json(g.ris_midpoint)},
      {"ris_spacing", g.ris_spacing},
      {"ris_grid", json::array({g.ris_grid.first, g.ris_grid.second})},
      {"bs_midpoint", point_json(g.bs_midpoint)},
      {"bs_spacing", g.bs_spacing},
      {"user_positions", users},
      {"tx_gain", g.tx_gain},
      {"rx_gain", g.rx_gain},
      {"mu0", spec.pgm.mu0},
      {"rho", spec.pgm.rho},
      {"delta_phi", spec.pgm.delta_phi},
      {"max_iters", spec.pgm.max_iters},
      {"tol", spec.pgm.tol},
      {"max_backtracks", spec.pgm.max_backtracks},
  };
  return doc.dump(2);
}

}  // namespace rissim
