#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "rissim/datalink.hpp"
#include "rissim/experiments.hpp"

using namespace rissim;

namespace {

ExperimentSpec small_nmse(int trials) {
  ExperimentSpec s = parse_config_text(R"({"M": 4, "R": 5, "sweep": "snr_db", "sweep_values": [10]})",
                                       Experiment::kNmseCir);
  s.trials = trials;
  return s;
}

const MetricsRecord& find(const std::vector<MetricsRecord>& rs, const std::string& scheme,
                          const std::string& metric, double value) {
  for (const auto& r : rs)
    if (r.scheme == scheme && r.metric_name == metric && r.sweep_value == value) return r;
  FAIL("record not found: " << scheme << " " << metric);
  return rs.front();
}

}  // namespace

TEST_CASE("empty configuration resolves to the defaults") {
  const ExperimentSpec s = parse_config_text("{}", Experiment::kNmseCir);
  CHECK(s.base.subcarriers == 96);
  CHECK(s.base.users == 3);
  CHECK(s.base.taps == 32);
  CHECK(s.base.cp_length == 34);
  CHECK(s.base.subcarriers == s.base.users * s.base.taps);
  CHECK(s.schemes.size() == 3);
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("inconsistent or unknown settings are rejected") {
  auto load = [](const std::string& text) {
    ExperimentSpec s = parse_config_text(text, Experiment::kNmseCir);
    s.validate();
    for (double v : s.sweep_values) s.validate_point(v);
  };
  CHECK_THROWS_AS(load(R"({"N": 100})"), ConfigError);
  CHECK_THROWS_AS(load(R"({"L_cp": 10})"), ConfigError);
  try {
    load(R"({"bogus": 1})");
    FAIL("accepted an unknown key");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown configuration key") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("{}", Experiment::kNmseCir, {"M=notanumber"}), ConfigError);
  CHECK_THROWS_AS(parse_experiment("nmse-foo"), ConfigError);
  CHECK(parse_experiment("cfo_sensitivity") == Experiment::kCfoSensitivity);
}

TEST_CASE("overrides take precedence over the file") {
  const ExperimentSpec s = parse_config_text(R"({"M": 4})", Experiment::kRate, {"M=32", "trials=7"});
  CHECK(s.base.antennas == 32);
  CHECK(s.trials == 7);
}

TEST_CASE("shortest round-trip float formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK(format_double(std::nan("")) == "nan");
  RandomStream rs(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = rs.normal(0.0, 1.0) * std::pow(10.0, rs.uniform(-30.0, 30.0));
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("CSV round trip") {
  std::vector<MetricsRecord> rs;
  rs.push_back({"nmse_cir", "proposed", "M", 16, 200, "eta_g", 0.123456789, 1e-3, 42, 864});
  rs.push_back({"rate", "ofdma+preamble", "R", 5, 100, "f1", 1.0 / 3.0, 2.5e-5, 7, 1440});
  const std::string text = to_csv(rs);
  CHECK(text.rfind("experiment,scheme,sweep_name,sweep_value,trials,metric_name,metric_value,"
                   "ci_halfwidth,seed,pilot_samples_used\n",
                   0) == 0);
  CHECK(parse_csv(text) == rs);

  const auto dir = std::filesystem::temp_directory_path() / "rissim_csv_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  write_csv(rs, path);
  CHECK(read_csv(path) == rs);
  CHECK(manifest_path(path) == (dir / "out.manifest").string());
}

TEST_CASE("summary statistics") {
  const Summary s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.ci_halfwidth == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  const Summary n = summarize({1.0, std::nan(""), 3.0});
  CHECK(n.mean == doctest::Approx(2.0));
  CHECK(std::isnan(summarize({}).mean));
}

TEST_CASE("16-PSK Gray mapping") {
  for (unsigned w = 0; w < 16; ++w) {
    const cd s = psk16_modulate(w);
    CHECK(std::abs(std::abs(s) - 1.0) < 1e-15);
    CHECK(psk16_demodulate(s) == w);
    CHECK(psk16_demodulate(s * std::polar(1.0, 0.15)) == w);
  }
  // neighbouring points differ in one bit
  for (int i = 0; i < 16; ++i) {
    const cd a = std::polar(1.0, 2.0 * M_PI * i / 16), b = std::polar(1.0, 2.0 * M_PI * (i + 1) / 16);
    const unsigned d = psk16_demodulate(a) ^ psk16_demodulate(b);
    CHECK(__builtin_popcount(d) == 1);
  }
}

TEST_CASE("noiseless data with perfect knowledge decodes without errors") {
  SystemConfig c;
  c.antennas = 4;
  c.ris_elements = 3;
  RandomStream rs(5);
  const ChannelSet ch = generate_channels(c, Geometry::defaults(c), rs);
  const std::vector<double> eps{0.4, -0.3, 0.1};
  const int B = 4;
  const DataBurst burst = build_data_burst(3, 96, B, 1.0, rs);
  CVector phi(4);
  phi << 1.0, std::polar(1.0, 0.3), std::polar(1.0, -2.0), std::polar(1.0, 1.1);
  SynthesisSetup setup;
  setup.cp_length = c.cp_length;
  setup.cfo_reference = 96;
  setup.time_origin = 1234;
  const ReceivedFrame f = synthesize_blocks(burst.tx, ch.taps, phi.replicate(1, B), eps, setup, rs);
  ReceiverState st;
  st.eps = eps;
  st.cfr = effective_cfr(cfr_from_cir(ch, 96), phi);
  st.amplitude = 1.0;
  CHECK(count_bit_errors(detect_burst(f, st, 3), burst.words) == 0);
}

TEST_CASE("zero training noise gives exact proposed estimates") {
  ExperimentSpec s = small_nmse(3);
  apply_setting(s, "noise_var", "0");
  apply_setting(s, "schemes", R"(["proposed", "tdma"])");
  const auto rs = run_experiment(s);
  CHECK(find(rs, "proposed", "eta_g", 10).metric_value < 1e-18);
  CHECK(find(rs, "proposed", "eta_eps", 10).metric_value < 1e-18);
  CHECK(find(rs, "tdma", "eta_g", 10).metric_value < 1e-18);
}

TEST_CASE("pilot accounting") {
  SystemConfig c;
  CHECK(pilot_samples(Scheme::kProposed, false, c, BudgetPolicy::kNative) == 96 * 9);
  CHECK(pilot_samples(Scheme::kTdma, false, c, BudgetPolicy::kNative) == 192 * 9);
  CHECK(pilot_samples(Scheme::kOfdma, true, c, BudgetPolicy::kNative) == 96 * 9 + 64 * 9);
  CHECK(pilot_samples(Scheme::kOfdma, true, c, BudgetPolicy::kMatched) == 192 * 9);
  const auto rs = run_experiment(small_nmse(2));
  for (const auto& r : rs) {
    if (r.scheme == "proposed") CHECK(r.pilot_samples_used == 96 * 6);
    if (r.scheme == "tdma") CHECK(r.pilot_samples_used == 192 * 6);
    if (r.scheme == "ofdma+preamble") CHECK(r.pilot_samples_used == 96 * 6 + 64 * 6);
  }
}

TEST_CASE("results do not depend on the worker count") {
  ExperimentSpec a = small_nmse(5);
  ExperimentSpec b = a;
  b.workers = 3;
  CHECK(to_csv(run_experiment(a)) == to_csv(run_experiment(b)));
  ExperimentSpec c = a;
  c.base.master_seed += 1;
  CHECK(to_csv(run_experiment(a)) != to_csv(run_experiment(c)));
}

TEST_CASE("confidence interval halves with four times the trials") {
  ExperimentSpec s = small_nmse(100);
  apply_setting(s, "schemes", R"(["proposed"])");
  const double ci100 = find(run_experiment(s), "proposed", "eta_eps", 10).ci_halfwidth;
  s.trials = 400;
  const double ci400 = find(run_experiment(s), "proposed", "eta_eps", 10).ci_halfwidth;
  CHECK(ci100 / ci400 == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("kappa sweep shows the floor-decrease-floor ordering") {
  ExperimentSpec s = parse_config_text(R"({"M": 4, "sweep_values": [-10, 4, 20]})", Experiment::kKappa);
  s.trials = 100;
  const auto rs = run_experiment(s);
  const double lo = find(rs, "proposed", "eta_g", -10).metric_value;
  const double mid = find(rs, "proposed", "eta_g", 4).metric_value;
  const double hi = find(rs, "proposed", "eta_g", 20).metric_value;
  CHECK(mid < lo);
  CHECK(hi <= mid);
}

TEST_CASE("manifest is written next to the CSV") {
  const ExperimentSpec s = small_nmse(2);
  RunLog log;
  const auto rs = run_experiment(s, &log);
  const auto dir = std::filesystem::temp_directory_path() / "rissim_manifest_test";
  std::filesystem::create_directories(dir);
  const std::string csv = (dir / "run.csv").string();
  write_csv(rs, csv);
  write_manifest(s, log, csv);
  std::ifstream in(manifest_path(csv));
  REQUIRE(in.good());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"version\"") != std::string::npos);
  CHECK(text.find("noise_calibration") != std::string::npos);
}
