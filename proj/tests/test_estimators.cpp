#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rissim/estimators.hpp"

using namespace rissim;

namespace {

ChannelSet channels_for(const SystemConfig& c, std::uint64_t seed) {
  RandomStream rs(seed);
  return generate_channels(c, Geometry::defaults(c), rs);
}

double cir_nmse(const Tensor4& est, const Tensor4& truth) {
  double e = 0.0, r = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    e += std::norm(est.data()[i] - truth.data()[i]);
    r += std::norm(truth.data()[i]);
  }
  return e / r;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct Trial {
  ChannelSet ch;
  ReceivedFrame frame;
};

Trial run(Scheme s, const SystemConfig& c, const std::vector<double>& eps, std::uint64_t seed) {
  const PilotPlan plan = build_pilots(s, c);
  Trial t{channels_for(c, seed), {}};
  RandomStream rs(seed + 1000);
  t.frame = synthesize_uplink(plan, t.ch, eps, ris_training_schedule(c.ris_elements), c, rs);
  return t;
}

}  // namespace

TEST_CASE("proposed estimators are exact without noise") {
  SystemConfig c;
  c.antennas = 4;
  c.noise_var = 0.0;
  const PilotPlan plan = build_pilots(Scheme::kProposed, c);
  const RisSchedule sched = ris_training_schedule(c.ris_elements);
  const std::vector<double> eps{0.31, -0.12, 0.47};
  const Trial t = run(Scheme::kProposed, c, eps, 3);
  const CfoEstimate cfo = estimate_cfo_proposed(t.frame, c);
  CHECK(cfo.lag == doctest::Approx(c.cp_length));
  CHECK(max_abs_diff(cfo.eps_hat, eps) < 1e-10);
  const CirEstimate cir = estimate_cir_proposed(t.frame, cfo, plan, sched, c);
  CHECK(cir_nmse(cir.g_hat, t.ch.taps) < 1e-18);
}

TEST_CASE("proposed CFO estimate across the admissible range") {
  SystemConfig c;
  c.antennas = 2;
  c.noise_var = 0.0;
  for (int i = 0; i < 17; ++i) {
    const double e = -0.48 + 0.06 * i;
    const std::vector<double> eps{e, -e * 0.5, 0.25};
    const Trial t = run(Scheme::kProposed, c, eps, 40 + i);
    CAPTURE(e);
    CHECK(max_abs_diff(estimate_cfo_proposed(t.frame, c).eps_hat, eps) < 1e-10);
  }
}

TEST_CASE("two-sample single-user case by hand") {
  SystemConfig c;
  c.users = 1;
  c.taps = 2;
  c.subcarriers = 2;
  c.cp_length = 3;
  c.antennas = 1;
  c.ris_elements = 0;
  c.noise_var = 0.0;
  const PilotPlan plan = build_pilots(Scheme::kProposed, c);
  const cd x0{1.0, 0.0}, x1{0.0, -1.0};
  CHECK(std::abs(plan.time_pilots(0, 0, 0) - x0) < 1e-15);
  CHECK(std::abs(plan.time_pilots(0, 0, 1) - x1) < 1e-15);

  ChannelSet ch;
  ch.taps = Tensor4({1, 1, 1, 2});
  ch.taps(0, 0, 0, 0) = 1.0;
  ch.taps(0, 0, 0, 1) = cd(0.5, 0.25);
  ch.per_user_gain = {1.0};
  const double eps = 0.1;
  RandomStream rs(0);
  const ReceivedFrame f = synthesize_uplink(plan, ch, {eps}, ris_training_schedule(0), c, rs);
  const cd g1 = ch.taps(0, 0, 0, 1);
  // CP sample -2 carries x(1) and, one tap later, x(0)
  const cd y_cp = std::polar(1.0, 2.0 * M_PI * eps * -2 / 2) * (x1 + g1 * x0);
  const cd y_last = std::polar(1.0, 2.0 * M_PI * eps * 1 / 2) * (x1 + g1 * x0);
  CHECK(std::abs(f.at(0, 0, -2) - y_cp) < 1e-14);
  CHECK(std::abs(f.at(0, 0, 1) - y_last) < 1e-14);

  const CfoEstimate cfo = estimate_cfo_proposed(f, c);
  CHECK(cfo.eps_hat[0] == doctest::Approx(eps).epsilon(1e-12));
  const CirEstimate cir = estimate_cir_proposed(f, cfo, plan, ris_training_schedule(0), c);
  CHECK(std::abs(cir.g_hat(0, 0, 0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(cir.g_hat(0, 0, 0, 1) - g1) < 1e-12);
}

TEST_CASE("OFDMA LS is exact without CFO or noise") {
  SystemConfig c;
  c.antennas = 3;
  c.noise_var = 0.0;
  const PilotPlan plan = build_pilots(Scheme::kOfdma, c);
  const RisSchedule sched = ris_training_schedule(c.ris_elements);
  const Trial t = run(Scheme::kOfdma, c, {0.0, 0.0, 0.0}, 5);
  const CirEstimate cir = estimate_cir_ofdma(to_frequency(t.frame), plan, sched, c);
  CHECK(cir_nmse(cir.g_hat, t.ch.taps) < 1e-18);

  // a common CFO is fully undone by the compensation
  const std::vector<double> eps{0.27, 0.27, 0.27};
  const Trial u = run(Scheme::kOfdma, c, eps, 6);
  const CfoEstimate known{eps, 0.0};
  const CirEstimate comp = estimate_cir_ofdma_compensated(u.frame, known, plan, sched, c);
  const CirEstimate plain = estimate_cir_ofdma(to_frequency(u.frame), plan, sched, c);
  CHECK(cir_nmse(comp.g_hat, u.ch.taps) < 1e-18);
  CHECK(cir_nmse(plain.g_hat, u.ch.taps) > 1e-2);
}

TEST_CASE("OFDMA pilot matrix needs at least L subcarriers per user") {
  SystemConfig c;
  c.subcarriers = 48;
  CHECK_THROWS_AS(build_pilots(Scheme::kOfdma, c), ConfigError);
}

TEST_CASE("single user with N = L: proposed and OFDMA agree") {
  SystemConfig c;
  c.users = 1;
  c.subcarriers = 32;
  c.antennas = 2;
  c.ris_elements = 3;
  c.noise_var = 0.0;
  const RisSchedule sched = ris_training_schedule(3);
  const Trial p = run(Scheme::kProposed, c, {0.0}, 9);
  const CirEstimate a =
      estimate_cir_proposed(p.frame, estimate_cfo_proposed(p.frame, c), build_pilots(Scheme::kProposed, c), sched, c);
  const Trial o = run(Scheme::kOfdma, c, {0.0}, 9);
  const CirEstimate b = estimate_cir_ofdma(to_frequency(o.frame), build_pilots(Scheme::kOfdma, c), sched, c);
  CHECK(cir_nmse(a.g_hat, p.ch.taps) < 1e-18);
  CHECK(cir_nmse(b.g_hat, o.ch.taps) < 1e-18);
  CHECK(cir_nmse(a.g_hat, b.g_hat) < 1e-18);
}

TEST_CASE("preamble CFO estimate") {
  SystemConfig c;
  c.antennas = 2;
  const ChannelSet ch = channels_for(c, 8);
  const std::vector<double> eps{0.3, -0.3, 0.0};
  RandomStream rs(0);
  const PreambleFrame pf = synthesize_preamble(preamble_length(c, false), ch, eps, c, 0, 0.0, rs);
  const CfoEstimate e = estimate_cfo_ofdma_preamble(pf, c);
  CHECK(max_abs_diff(e.eps_hat, eps) < 1e-10);
  CHECK(e.lag == doctest::Approx(c.taps));
}

TEST_CASE("preamble CFO variance falls as 1/M") {
  SystemConfig c;
  c.users = 1;
  c.ris_elements = 2;
  auto variance = [&](int M) {
    c.antennas = M;
    RandomStream rs(100 + M);
    double s = 0.0;
    const int n = 1500;
    for (int i = 0; i < n; ++i) {
      const ChannelSet ch = generate_channels(c, Geometry::defaults(c), rs);
      double pw = 0.0;
      for (int m = 0; m < M; ++m)
        for (int l = 0; l < c.taps; ++l) {
          cd g{0.0, 0.0};
          for (int r = 0; r <= c.ris_elements; ++r) g += ch.taps(0, m, r, l);
          pw += std::norm(g) / M;
        }
      const PreambleFrame pf = synthesize_preamble(preamble_length(c, false), ch, {0.1}, c, 0, 0.05 * pw, rs);
      const double d = estimate_cfo_ofdma_preamble(pf, c).eps_hat[0] - 0.1;
      s += d * d;
    }
    return s / n;
  };
  const double ratio = variance(4) / variance(16);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("TDMA joint estimator is exact without noise") {
  SystemConfig c;
  c.antennas = 3;
  c.noise_var = 0.0;
  const PilotPlan plan = build_pilots(Scheme::kTdma, c);
  const std::vector<double> eps{-0.44, 0.18, 0.02};
  const Trial t = run(Scheme::kTdma, c, eps, 12);
  const auto [cfo, cir] = estimate_joint_tdma(t.frame, plan, ris_training_schedule(c.ris_elements), c);
  CHECK(cfo.lag == doctest::Approx(c.taps));
  CHECK(max_abs_diff(cfo.eps_hat, eps) < 1e-10);
  CHECK(cir_nmse(cir.g_hat, t.ch.taps) < 1e-18);
}

TEST_CASE("proposed CFO error scales with the noise level and is unbiased") {
  SystemConfig c;
  c.antennas = 4;
  const std::vector<double> eps{0.2, -0.1, 0.35};
  const PilotPlan plan = build_pilots(Scheme::kProposed, c);
  const RisSchedule sched = ris_training_schedule(c.ris_elements);
  auto stats = [&](double noise) {
    c.noise_var = noise;
    RandomStream rs(77);
    double se = 0.0, sum = 0.0;
    const int n = 400;
    for (int i = 0; i < n; ++i) {
      RandomStream draw = rs.child({static_cast<std::uint64_t>(i)});
      const ChannelSet ch = generate_channels(c, Geometry::defaults(c), draw);
      ChannelSet scaled = ch;
      // unit-power channels keep the SNR fixed across draws
      for (int k = 0; k < 3; ++k) scaled.per_user_gain[k] = 1.0;
      for (int k = 0; k < 3; ++k) {
        double pw = 0.0;
        for (int m = 0; m < 4; ++m)
          for (int l = 0; l < c.taps; ++l) pw += std::norm(ch.taps(k, m, 0, l));
        const double s = 1.0 / std::sqrt(pw / 4.0);
        for (int m = 0; m < 4; ++m)
          for (int r = 0; r <= c.ris_elements; ++r)
            for (auto& v : scaled.taps.row(k, m, r)) v *= s;
      }
      const ReceivedFrame f = synthesize_uplink(plan, scaled, eps, sched, c, draw);
      const CfoEstimate e = estimate_cfo_proposed(f, c);
      for (int k = 0; k < 3; ++k) {
        const double d = e.eps_hat[k] - eps[k];
        se += d * d;
        sum += d;
      }
    }
    return std::pair{se / (3 * n), sum / (3 * n)};
  };
  const auto [mse_lo, bias_lo] = stats(1e-3);
  const auto [mse_hi, bias_hi] = stats(1e-2);
  const double slope = 10.0 * std::log10(mse_hi / mse_lo) / 10.0;
  CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::abs(bias_hi) < 4.0 * std::sqrt(mse_hi / 1200.0));
  CHECK(std::abs(bias_lo) < 4.0 * std::sqrt(mse_lo / 1200.0));
}

TEST_CASE("estimators reject mismatched plans") {
  SystemConfig c;
  c.noise_var = 0.0;
  const PilotPlan tdma = build_pilots(Scheme::kTdma, c);
  const Trial t = run(Scheme::kProposed, c, {0.0, 0.0, 0.0}, 1);
  const CfoEstimate cfo = estimate_cfo_proposed(t.frame, c);
  CHECK_THROWS_AS(estimate_cir_proposed(t.frame, cfo, tdma, ris_training_schedule(c.ris_elements), c),
                  ConfigError);
  SystemConfig few = c;
  few.ris_elements = 1;
  CHECK_THROWS_AS(run(Scheme::kProposed, few, {0.0, 0.0, 0.0}, 1), ConfigError);
}
