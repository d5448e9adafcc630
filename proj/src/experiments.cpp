#include "rissim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "rissim/airlink.hpp"
#include "rissim/datalink.hpp"
#include "rissim/estimators.hpp"

namespace rissim {

namespace {

enum StreamTag : std::uint64_t {
  kChannel = 1,
  kCfo = 2,
  kNoise = 3,
  kCalibration = 4,
  kData = 5,
  kDataNoise = 6,
};

constexpr const char* kVersion = "1.0.0";

struct Arm {
  Scheme scheme;
  bool preamble = false;
  std::string label;
  std::uint64_t id = 0;
};

std::vector<Arm> arms_for(const ExperimentSpec& spec) {
  std::vector<Arm> arms;
  for (Scheme s : spec.schemes) {
    Arm a{s, false, scheme_name(s), static_cast<std::uint64_t>(s) + 1};
    if (s == Scheme::kOfdma && spec.experiment != Experiment::kCfoSensitivity) {
      a.preamble = true;
      a.label = "ofdma+preamble";
    }
    arms.push_back(a);
  }
  return arms;
}

struct Point {
  const ExperimentSpec* spec = nullptr;
  std::size_t index = 0;
  double value = 0.0;
  SystemConfig config;
  Geometry geometry;
  RisSchedule schedule;
  std::vector<PilotPlan> plans;      // per arm
  std::vector<double> train_noise;  // per arm
  int preamble = 0;
  double cfo_variance = 0.0;
  double rate_noise = 0.0;
  double data_noise = 0.0;

  std::uint64_t key() const { return static_cast<std::uint64_t>(spec->experiment) + 1; }
  std::uint64_t seed() const { return config.master_seed; }
  RandomStream stream(std::initializer_list<std::uint64_t> tail) const {
    std::vector<std::uint64_t> keys{key(), index};
    keys.insert(keys.end(), tail.begin(), tail.end());
    std::uint64_t s = derive_seed(seed(), {});
    for (auto k : keys) s = derive_seed(s, {k});
    return RandomStream(s);
  }
};

std::vector<double> draw_cfos(const Point& pt, int trial) {
  // keyed by trial only: every sweep point sees the same offsets
  RandomStream rs(derive_seed(pt.seed(), {pt.key(), kCfo, static_cast<std::uint64_t>(trial)}));
  const bool gaussian = pt.spec->experiment == Experiment::kCfoSensitivity;
  std::vector<double> eps(pt.config.users);
  for (auto& e : eps) {
    if (gaussian) {
      e = std::clamp(std::sqrt(pt.cfo_variance) * rs.normal(0.0, 1.0), -0.5, 0.5);
    } else {
      e = 0.5 - rs.uniform(0.0, 1.0);
    }
  }
  return eps;
}

ChannelSet draw_channels(const Point& pt, int trial) {
  RandomStream rs = pt.stream({static_cast<std::uint64_t>(trial), kChannel});
  return generate_channels(pt.config, pt.geometry, rs);
}

struct Training {
  CfoEstimate cfo;
  CirEstimate cir;
  bool has_cfo = false;
  long long end_time = 0;
};

Training train(const Point& pt, const Arm& arm, std::size_t arm_index, const ChannelSet& ch,
               const std::vector<double>& cfos, RandomStream& rng, bool need_cir) {
  SystemConfig cfg = pt.config;
  cfg.noise_var = pt.train_noise[arm_index];
  const PilotPlan& plan = pt.plans[arm_index];
  Training t;
  long long origin = 0;
  if (arm.preamble) {
    const PreambleFrame pre =
        synthesize_preamble(pt.preamble, ch, cfos, cfg, 0, cfg.noise_var, rng);
    t.cfo = estimate_cfo_ofdma_preamble(pre, cfg);
    t.has_cfo = true;
    origin = pt.preamble;
  }
  const ReceivedFrame frame = synthesize_uplink(plan, ch, cfos, pt.schedule, cfg, rng, origin);
  t.end_time = origin + static_cast<long long>(frame.blocks()) * frame.symbol_length();
  switch (arm.scheme) {
    case Scheme::kProposed:
      t.cfo = estimate_cfo_proposed(frame, cfg);
      t.has_cfo = true;
      if (need_cir) t.cir = estimate_cir_proposed(frame, t.cfo, plan, pt.schedule, cfg);
      break;
    case Scheme::kTdma: {
      auto [c, g] = estimate_joint_tdma(frame, plan, pt.schedule, cfg);
      t.cfo = c;
      t.cir = g;
      t.has_cfo = true;
      break;
    }
    case Scheme::kOfdma:
      if (arm.preamble) {
        if (need_cir) t.cir = estimate_cir_ofdma_compensated(frame, t.cfo, plan, pt.schedule, cfg);
      } else {
        t.cfo.eps_hat.assign(cfg.users, 0.0);
        if (need_cir) t.cir = estimate_cir_ofdma(to_frequency(frame), plan, pt.schedule, cfg);
      }
      break;
  }
  return t;
}

double eta_eps(const std::vector<double>& eps, const std::vector<double>& est) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    num += (eps[k] - est[k]) * (eps[k] - est[k]);
    den += eps[k] * eps[k];
  }
  if (den == 0.0) return std::nan("");
  return num / den / static_cast<double>(eps.size());
}

double eta_g(const Tensor4& g, const Tensor4& g_hat) {
  const auto [K, M, P, L] = g.dims();
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) {
      double num = 0.0, den = 0.0;
      for (std::size_t r = 0; r < P; ++r) {
        auto a = g.row(k, m, r);
        auto b = g_hat.row(k, m, r);
        for (std::size_t l = 0; l < L; ++l) {
          num += std::norm(a[l] - b[l]);
          den += std::norm(a[l]);
        }
      }
      acc += num / den;
    }
  return acc / static_cast<double>(K * M);
}

double noise_for(double rx_power, double snr_db) { return rx_power / std::pow(10.0, snr_db / 10.0); }

/// Mean received data-sample power with phi = all-ones, from a calibration draw.
double data_rx_power(const Point& pt) {
  RandomStream rs = pt.stream({kCalibration, kData});
  const ChannelSet ch = generate_channels(pt.config, pt.geometry, rs);
  std::vector<double> eps(pt.config.users);
  for (auto& e : eps) e = 0.5 - rs.uniform(0.0, 1.0);
  const int B = pt.config.blocks();
  const DataBurst burst = build_data_burst(pt.config.users, pt.config.subcarriers, B,
                                           pt.config.tx_power, rs);
  SynthesisSetup setup;
  setup.cp_length = pt.config.cp_length;
  setup.cfo_reference = pt.config.subcarriers;
  const CMatrix ones = CMatrix::Ones(pt.config.ris_elements + 1, B);
  const ReceivedFrame f = synthesize_blocks(burst.tx, ch.taps, ones, eps, setup, rs);
  return mean_body_power(f);
}

Point make_point(const ExperimentSpec& spec, std::size_t index, double value,
                 const std::vector<Arm>& arms, RunLog* log) {
  Point pt;
  pt.spec = &spec;
  pt.index = index;
  pt.value = value;
  pt.config = spec.config_at(value);
  pt.geometry = spec.geometry.resolve(pt.config);
  pt.schedule = ris_training_schedule(pt.config.ris_elements);
  pt.cfo_variance = spec.cfo_variance_at(value);
  pt.preamble = preamble_length(pt.config, spec.budget == BudgetPolicy::kMatched);

  RandomStream cal = pt.stream({kCalibration});
  const ChannelSet ch = generate_channels(pt.config, pt.geometry, cal);
  std::vector<double> eps(pt.config.users);
  for (auto& e : eps) e = 0.5 - cal.uniform(0.0, 1.0);

  for (std::size_t a = 0; a < arms.size(); ++a) {
    pt.plans.push_back(build_pilots(arms[a].scheme, pt.config));
    double nv = pt.config.noise_var;
    if (!spec.noise_var_given) {
      SystemConfig quiet = pt.config;
      quiet.noise_var = 0.0;
      RandomStream unused(0);
      const ReceivedFrame f = synthesize_uplink(pt.plans.back(), ch, eps, pt.schedule, quiet, unused);
      nv = noise_for(mean_body_power(f), pt.config.snr_db);
    }
    pt.train_noise.push_back(nv);
    if (log)
      log->calibration.emplace_back(std::to_string(index) + "/" + arms[a].label + "/training", nv);
  }
  if (spec.experiment == Experiment::kRate || spec.experiment == Experiment::kBer) {
    const double prx = data_rx_power(pt);
    pt.rate_noise = spec.noise_var_given && pt.config.noise_var > 0 ? pt.config.noise_var
                                                                    : noise_for(prx, pt.config.snr_db);
    const int N = pt.config.subcarriers;
    const double eb = prx * (N + pt.config.cp_length) / (static_cast<double>(N) * kBitsPerSymbol);
    pt.data_noise = eb / std::pow(10.0, spec.eb_n0_at(value) / 10.0);
    if (log) {
      log->calibration.emplace_back(std::to_string(index) + "/rate", pt.rate_noise);
      log->calibration.emplace_back(std::to_string(index) + "/data", pt.data_noise);
    }
  }
  return pt;
}

/// Per-trial metric table: values[trial][column].
using Table = std::vector<std::vector<double>>;

struct Column {
  std::string arm;
  std::string metric;
  long long pilots = 0;
};

Table run_trials(int trials, int workers, std::size_t columns,
                 const std::function<void(int, std::vector<double>&)>& body) {
  Table table(trials, std::vector<double>(columns, std::nan("")));
  parallel_for(trials, workers, [&](int t) { body(t, table[t]); });
  return table;
}

void emit(const ExperimentSpec& spec, const Point* pt, double value, const std::vector<Column>& cols,
          const Table* table, std::vector<MetricsRecord>& out) {
  for (std::size_t c = 0; c < cols.size(); ++c) {
    MetricsRecord r;
    r.experiment = experiment_name(spec.experiment);
    r.scheme = cols[c].arm;
    r.sweep_name = spec.sweep;
    r.sweep_value = value;
    r.trials = spec.trials;
    r.metric_name = cols[c].metric;
    r.seed = spec.base.master_seed;
    r.pilot_samples_used = cols[c].pilots;
    if (table && pt) {
      std::vector<double> v(table->size());
      for (std::size_t t = 0; t < table->size(); ++t) v[t] = (*table)[t][c];
      const Summary s = summarize(v);
      r.metric_value = s.mean;
      r.ci_halfwidth = s.ci_halfwidth;
    } else {
      r.metric_value = std::nan("");
      r.ci_halfwidth = std::nan("");
    }
    out.push_back(r);
  }
}

long long arm_pilots(const Arm& arm, const SystemConfig& config, BudgetPolicy policy) {
  return pilot_samples(arm.scheme, arm.preamble, config, policy);
}

/// Shared sweep loop: validates each point, builds context, runs trials, emits rows.
template <typename Columns, typename Body>
std::vector<MetricsRecord> sweep(const ExperimentSpec& spec, RunLog* log, Columns make_columns,
                                 Body body) {
  spec.validate();
  const auto arms = arms_for(spec);
  std::vector<MetricsRecord> out;
  std::vector<double> values = spec.sweep_values;
  if (spec.sweep.empty()) values = {0.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    SystemConfig cfg = spec.base;
    try {
      cfg = spec.config_at(v);
      spec.validate_point(v);
    } catch (const Error& e) {
      if (log)
        log->messages.push_back("skipped " + spec.sweep + "=" + format_double(v) + ": " + e.what());
      emit(spec, nullptr, v, make_columns(arms, cfg), nullptr, out);
      continue;
    }
    const Point pt = make_point(spec, i, v, arms, log);
    const auto cols = make_columns(arms, pt.config);
    const Table table = run_trials(spec.trials, spec.workers, cols.size(),
                                   [&](int t, std::vector<double>& row) { body(pt, arms, t, row, log); });
    emit(spec, &pt, v, cols, &table, out);
  }
  return out;
}

}  // namespace

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min(workers, n);
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

long long pilot_samples(Scheme scheme, bool with_preamble, const SystemConfig& config,
                        BudgetPolicy policy) {
  long long n = static_cast<long long>(frame_length(scheme, config)) * config.blocks();
  if (with_preamble) n += preamble_length(config, policy == BudgetPolicy::kMatched);
  return n;
}

std::vector<MetricsRecord> run_nmse_experiment(const ExperimentSpec& spec, RunLog* log) {
  const bool cfo_only = spec.experiment == Experiment::kNmseCfo;
  auto columns = [&](const std::vector<Arm>& arms, const SystemConfig& cfg) {
    std::vector<Column> cols;
    for (const auto& a : arms) {
      const long long p = arm_pilots(a, cfg, spec.budget);
      if (!cfo_only) cols.push_back({a.label, "eta_g", p});
      cols.push_back({a.label, "eta_eps", p});
    }
    return cols;
  };
  auto body = [&](const Point& pt, const std::vector<Arm>& arms, int t, std::vector<double>& row,
                  RunLog*) {
    const auto cfos = draw_cfos(pt, t);
    const ChannelSet ch = draw_channels(pt, t);
    std::size_t c = 0;
    for (std::size_t a = 0; a < arms.size(); ++a) {
      RandomStream rng = pt.stream({static_cast<std::uint64_t>(t), kNoise, arms[a].id});
      const Training tr = train(pt, arms[a], a, ch, cfos, rng, !cfo_only);
      if (!cfo_only) row[c++] = eta_g(ch.taps, tr.cir.g_hat);
      row[c++] = tr.has_cfo ? eta_eps(cfos, tr.cfo.eps_hat) : std::nan("");
    }
  };
  return sweep(spec, log, columns, body);
}

std::vector<MetricsRecord> run_kappa_experiment(const ExperimentSpec& spec, RunLog* log) {
  return run_nmse_experiment(spec, log);
}

std::vector<MetricsRecord> run_rate_experiment(const ExperimentSpec& spec, RunLog* log) {
  auto grid_ok = [&](const SystemConfig& cfg) {
    return std::pow(static_cast<double>(spec.grid_levels), cfg.ris_elements) <= 1e7;
  };
  auto columns = [&](const std::vector<Arm>& arms, const SystemConfig& cfg) {
    std::vector<Column> cols;
    for (const auto& a : arms) cols.push_back({a.label, "f1", arm_pilots(a, cfg, spec.budget)});
    cols.push_back({"perfect_csi", "f1", 0});
    cols.push_back({"grid_search", "f1", 0});
    return cols;
  };
  auto body = [&](const Point& pt, const std::vector<Arm>& arms, int t, std::vector<double>& row,
                  RunLog*) {
    const SystemConfig& cfg = pt.config;
    const auto cfos = draw_cfos(pt, t);
    const ChannelSet ch = draw_channels(pt, t);
    const RateModel truth = RateModel::from_cfr(cfr_from_cir(ch, cfg.subcarriers), cfg.tx_power,
                                                pt.rate_noise, cfg.upsilon, cfg.cp_length);
    const RisPhases init = all_ones_phases(cfg.ris_elements);
    for (std::size_t a = 0; a < arms.size(); ++a) {
      RandomStream rng = pt.stream({static_cast<std::uint64_t>(t), kNoise, arms[a].id});
      const Training tr = train(pt, arms[a], a, ch, cfos, rng, true);
      const RateModel est = RateModel::from_cfr(cfr_from_cir(tr.cir.g_hat, cfg.subcarriers),
                                                cfg.tx_power, pt.rate_noise, cfg.upsilon,
                                                cfg.cp_length);
      const PgmResult res = pgm_optimize(est, spec.pgm, init);
      row[a] = achievable_rate(res.phases, truth).f1;
    }
    row[arms.size()] = achievable_rate(pgm_optimize(truth, spec.pgm, init).phases, truth).f1;
    if (grid_ok(cfg)) row[arms.size() + 1] = achievable_rate(grid_search(truth, spec.grid_levels), truth).f1;
  };
  if (log)
    for (double v : spec.sweep_values.empty() ? std::vector<double>{0.0} : spec.sweep_values)
      if (!grid_ok(spec.config_at(v)))
        log->messages.push_back("grid_search arm skipped at " + spec.sweep + "=" + format_double(v) +
                                ": levels^R exceeds 1e7");
  return sweep(spec, log, columns, body);
}

std::vector<MetricsRecord> run_ber_experiment(const ExperimentSpec& spec, RunLog* log) {
  auto columns = [&](const std::vector<Arm>& arms, const SystemConfig& cfg) {
    std::vector<Column> cols;
    for (const auto& a : arms) cols.push_back({a.label, "ber", arm_pilots(a, cfg, spec.budget)});
    cols.push_back({"perfect_csi", "ber", 0});
    return cols;
  };
  auto body = [&](const Point& pt, const std::vector<Arm>& arms, int t, std::vector<double>& row,
                  RunLog*) {
    const SystemConfig& cfg = pt.config;
    const int K = cfg.users, N = cfg.subcarriers, B = cfg.blocks();
    const auto cfos = draw_cfos(pt, t);
    const ChannelSet ch = draw_channels(pt, t);
    const Tensor4 h_true = cfr_from_cir(ch, N);
    RandomStream data_rng = pt.stream({static_cast<std::uint64_t>(t), kData});
    const DataBurst burst = build_data_burst(K, N, B, cfg.tx_power, data_rng);
    const double bits = static_cast<double>(K) * B * burst.subcarriers_per_user * kBitsPerSymbol;
    const RisPhases init = all_ones_phases(cfg.ris_elements);

    auto run_arm = [&](const std::vector<double>& eps_hat, const Tensor4& h_hat, long long origin) {
      const RateModel model = RateModel::from_cfr(h_hat, cfg.tx_power, pt.data_noise, cfg.upsilon,
                                                  cfg.cp_length);
      const CVector phi = pgm_optimize(model, spec.pgm, init).phases.phi_d;
      SynthesisSetup setup;
      setup.cp_length = cfg.cp_length;
      setup.cfo_reference = N;
      setup.time_origin = origin;
      setup.noise_var = pt.data_noise;
      RandomStream noise = pt.stream({static_cast<std::uint64_t>(t), kDataNoise});
      const CMatrix reflection = phi.replicate(1, B);
      const ReceivedFrame frame = synthesize_blocks(burst.tx, ch.taps, reflection, cfos, setup, noise);
      ReceiverState state;
      state.eps = eps_hat;
      state.cfr = effective_cfr(h_hat, phi);
      state.amplitude = std::sqrt(cfg.tx_power);
      const auto words = detect_burst(frame, state, K);
      return static_cast<double>(count_bit_errors(words, burst.words)) / bits;
    };

    long long reference_origin = static_cast<long long>(B) * cfg.symbol_length();
    for (std::size_t a = 0; a < arms.size(); ++a) {
      RandomStream rng = pt.stream({static_cast<std::uint64_t>(t), kNoise, arms[a].id});
      const Training tr = train(pt, arms[a], a, ch, cfos, rng, true);
      row[a] = run_arm(tr.cfo.eps_hat, cfr_from_cir(tr.cir.g_hat, N), tr.end_time);
    }
    row[arms.size()] = run_arm(cfos, h_true, reference_origin);
  };
  return sweep(spec, log, columns, body);
}

std::vector<MetricsRecord> run_experiment(const ExperimentSpec& spec, RunLog* log) {
  switch (spec.experiment) {
    case Experiment::kNmseCfo:
    case Experiment::kNmseCir:
    case Experiment::kCfoSensitivity:
      return run_nmse_experiment(spec, log);
    case Experiment::kKappa:
      return run_kappa_experiment(spec, log);
    case Experiment::kRate:
      return run_rate_experiment(spec, log);
    case Experiment::kBer:
      return run_ber_experiment(spec, log);
  }
  return {};
}

void write_manifest(const ExperimentSpec& spec, const RunLog& log, const std::string& csv_path) {
  using nlohmann::json;
  json cal = json::object();
  for (const auto& [k, v] : log.calibration) cal[k] = v;
  json doc = {
      {"artifact", "rissim"},
      {"version", kVersion},
      {"csv", csv_path},
      {"parameters", json::parse(describe_spec(spec))},
      {"design_decisions",
       {"ris_inverse_scaled_adjoint", "zc_root_kth_coprime", "noise_from_calibrated_rx_power",
        "tap0_unit_zero_phase", "scatter_pdp_uniform", "path_loss_shared_by_direct_path",
        "cp_literal_prefix_linear_tail", "zero_prefix_modulo", "cfo_lag_l_cp",
        "block_average_floor", "proposed_ls_full_block", "ofdma_ls_sqrt_n",
        "ofdma_preamble_turns", "ofdma_preamble_per_user_derotation", "projection_alpha_zero",
        "pgm_init_all_ones", "gamma_unit", "receiver_joint_zf_mrc",
        "ebn0_from_calibrated_rx_power", "cfo_common_random_numbers", "training_snr_fixed",
        "timing_offset_zero"}},
      {"noise_calibration", cal},
      {"log", log.messages},
  };
  std::ofstream out(manifest_path(csv_path), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest for '" + csv_path + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace rissim
