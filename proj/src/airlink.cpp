#include "rissim/airlink.hpp"

#include <cmath>
#include <numbers>

namespace rissim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cd unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

cd ReceivedFrame::ramp(double eps, int b, int u) const {
  return unit(kTwoPi * eps * time_index(b, u) / cfo_reference);
}

int frame_length(Scheme scheme, const SystemConfig& config) {
  const int n = config.subcarriers;
  if (scheme == Scheme::kTdma) {
    const int need = 2 * config.users * config.taps;
    return (n >= need && n % config.users == 0) ? n : 2 * n;
  }
  return n;
}

int proposed_zero_prefix(int k, int b, int users, int taps) {
  const int slot = ((k - b % users) % users + users) % users;
  return slot * taps;
}

PilotPlan build_pilots(Scheme scheme, const SystemConfig& config) {
  const int n = frame_length(scheme, config);
  config.validate_for(scheme, n);
  const int K = config.users, L = config.taps, B = config.blocks();
  const double P = config.tx_power;

  PilotPlan plan;
  plan.scheme = scheme;
  plan.length = n;
  plan.time_pilots = Tensor3({static_cast<std::size_t>(K), static_cast<std::size_t>(B),
                              static_cast<std::size_t>(n)});

  switch (scheme) {
    case Scheme::kProposed:
      for (int k = 0; k < K; ++k) {
        const CVector z = zadoff_chu(L, zc_root_for_user(L, k));
        for (int b = 0; b < B; ++b) {
          const int zeros = proposed_zero_prefix(k, b, K, L);
          const double amp = std::sqrt(n * P / (K * static_cast<double>(n - zeros)));
          auto x = plan.time_pilots.row(k, b);
          for (int u = zeros; u < n; ++u) x[u] = amp * z((u - zeros) % L);
        }
      }
      break;
    case Scheme::kTdma: {
      const int slot = n / K;
      const double amp = std::sqrt(P);
      for (int k = 0; k < K; ++k) {
        const CVector z = zadoff_chu(L, zc_root_for_user(L, k));
        for (int b = 0; b < B; ++b) {
          auto x = plan.time_pilots.row(k, b);
          for (int u = 0; u < slot; ++u) x[k * slot + u] = amp * z(u % L);
        }
      }
      break;
    }
    case Scheme::kOfdma: {
      const int ns = n / K;
      const CMatrix fh = dft_matrix(n).adjoint();
      const double amp = std::sqrt(P);
      for (int k = 0; k < K; ++k) {
        std::vector<int> gamma(ns);
        for (int i = 0; i < ns; ++i) gamma[i] = k + i * K;
        const CVector s_tilde = amp * zadoff_chu(ns, zc_root_for_user(ns, k));
        CVector s = CVector::Zero(n);
        for (int i = 0; i < ns; ++i) s(gamma[i]) = s_tilde(i);
        const CVector x = fh * s;
        for (int b = 0; b < B; ++b) {
          auto dst = plan.time_pilots.row(k, b);
          for (int u = 0; u < n; ++u) dst[u] = x(u);
        }
        plan.allocation.push_back(std::move(gamma));
        plan.freq_pilots.push_back(s_tilde);
      }
      break;
    }
  }
  return plan;
}

ReceivedFrame synthesize_blocks(const Tensor3& tx, const Tensor4& taps, const CMatrix& reflection,
                                const std::vector<double>& cfos, const SynthesisSetup& setup,
                                RandomStream& rng) {
  const int K = static_cast<int>(tx.dim(0));
  const int B = static_cast<int>(tx.dim(1));
  const int N = static_cast<int>(tx.dim(2));
  const int M = static_cast<int>(taps.dim(1));
  const int L = static_cast<int>(taps.dim(3));
  const int cp = setup.cp_length;
  if (static_cast<int>(taps.dim(0)) != K || static_cast<int>(cfos.size()) != K)
    throw DimensionError("user count mismatch between pilots, channels and CFOs");
  if (reflection.cols() != B) throw DimensionError("one reflection vector per block required");
  if (L > N) throw DimensionError("delay spread exceeds the block length");
  for (double e : cfos)
    if (!(std::abs(e) <= 0.5)) throw RangeError("CFO magnitude must not exceed 0.5");

  ReceivedFrame frame;
  frame.cp_length = cp;
  frame.length = N;
  frame.cfo_reference = setup.cfo_reference > 0 ? setup.cfo_reference : N;
  frame.time_origin = setup.time_origin;
  frame.noise_var = setup.noise_var;
  frame.cfos = cfos;
  const int Ls = N + cp;
  frame.samples = Tensor3({static_cast<std::size_t>(M), static_cast<std::size_t>(B),
                           static_cast<std::size_t>(Ls)});

  const Tensor4 gbar = effective_cir(taps, reflection);
  // transmitted waveform of one block over u in [-cp-(L-1), N), offset by cp + L - 1
  const int pre = cp + L - 1;
  std::vector<cd> wave(pre + N);
  std::vector<cd> phase(Ls);
  for (int k = 0; k < K; ++k)
    for (int b = 0; b < B; ++b) {
      auto x = tx.row(k, b);
      for (int w = -pre; w < 0; ++w) {
        cd v{0.0, 0.0};
        if (w >= -cp) {
          v = x[w + cp];
        } else if (b > 0) {
          v = tx(k, b - 1, w + cp + N);
        }
        wave[w + pre] = v;
      }
      for (int u = 0; u < N; ++u) wave[u + pre] = x[u];
      for (int v = 0; v < Ls; ++v) phase[v] = frame.ramp(cfos[k], b, v - cp);

      for (int m = 0; m < M; ++m) {
        auto g = gbar.row(k, m, b);
        auto out = frame.samples.row(m, b);
        for (int u = -cp; u < 0; ++u) {
          cd acc{0.0, 0.0};
          for (int l = 0; l < L; ++l) acc += wave[u - l + pre] * g[l];
          out[u + cp] += phase[u + cp] * acc;
        }
        for (int u = 0; u < N; ++u) {
          cd acc{0.0, 0.0};
          for (int l = 0; l < L; ++l) {
            const int idx = u - l >= 0 ? u - l : u - l + N;
            acc += x[idx] * g[l];
          }
          out[u + cp] += phase[u + cp] * acc;
        }
      }
    }

  if (setup.noise_var > 0.0)
    for (auto& v : frame.samples.data()) v += rng.complex_normal(setup.noise_var);
  return frame;
}

ReceivedFrame synthesize_uplink(const PilotPlan& plan, const ChannelSet& channels,
                                const std::vector<double>& cfos, const RisSchedule& schedule,
                                const SystemConfig& config, RandomStream& rng,
                                long long time_origin) {
  if (plan.blocks() != schedule.blocks() || channels.paths() != schedule.blocks())
    throw DimensionError("pilot blocks, RIS schedule and channel paths disagree");
  SynthesisSetup setup;
  setup.cp_length = config.cp_length;
  setup.cfo_reference = config.subcarriers;
  setup.time_origin = time_origin;
  setup.noise_var = config.noise_var;
  return synthesize_blocks(plan.time_pilots, channels.taps, schedule.phi, cfos, setup, rng);
}

Tensor3 to_frequency(const ReceivedFrame& frame) {
  const int M = frame.antennas(), B = frame.blocks(), N = frame.length;
  const CMatrix f = dft_matrix(N);
  CMatrix y(N, M * B);
  for (int m = 0; m < M; ++m)
    for (int b = 0; b < B; ++b)
      for (int u = 0; u < N; ++u) y(u, m * B + b) = frame.at(m, b, u);
  const CMatrix r = f * y;
  Tensor3 out({static_cast<std::size_t>(M), static_cast<std::size_t>(B),
               static_cast<std::size_t>(N)});
  for (int m = 0; m < M; ++m)
    for (int b = 0; b < B; ++b)
      for (int n = 0; n < N; ++n) out(m, b, n) = r(n, m * B + b);
  return out;
}

ReceivedFrame derotate(const ReceivedFrame& frame, double eps) {
  ReceivedFrame out = frame;
  const int cp = frame.cp_length;
  for (int m = 0; m < frame.antennas(); ++m)
    for (int b = 0; b < frame.blocks(); ++b) {
      auto row = out.samples.row(m, b);
      for (int v = 0; v < frame.symbol_length(); ++v) row[v] *= std::conj(frame.ramp(eps, b, v - cp));
    }
  return out;
}

int preamble_length(const SystemConfig& config, bool matched_budget) {
  const int per_block = matched_budget ? config.users * config.taps : 2 * config.taps;
  return per_block * config.blocks();
}

PreambleFrame synthesize_preamble(int total_length, const ChannelSet& channels,
                                  const std::vector<double>& cfos, const SystemConfig& config,
                                  long long time_origin, double noise_var, RandomStream& rng) {
  const int K = channels.users(), M = channels.antennas(), P = channels.paths();
  const int L = channels.taps_per_path();
  const int region = total_length / K;
  if (region < 2 * L)
    throw ConfigError("preamble region per user must hold at least two pilot periods");
  if (static_cast<int>(cfos.size()) != K) throw DimensionError("one CFO per user required");

  PreambleFrame pf;
  pf.samples = CMatrix::Zero(M, total_length);
  pf.region_length = region;
  pf.taps = L;
  pf.cfo_reference = config.subcarriers;
  pf.noise_var = noise_var;
  pf.cfos = cfos;
  const double amp = std::sqrt(config.tx_power);
  for (int k = 0; k < K; ++k) {
    const int start = k * region;
    pf.region_start.push_back(start);
    const CVector z = zadoff_chu(L, zc_root_for_user(L, k));
    for (int m = 0; m < M; ++m) {
      std::vector<cd> g(L, cd{0.0, 0.0});
      for (int r = 0; r < P; ++r) {
        auto src = channels.taps.row(k, m, r);
        for (int l = 0; l < L; ++l) g[l] += src[l];
      }
      // user k transmits on [start, start + region); its echo lasts L - 1 more samples
      const int stop = std::min(total_length, start + region + L - 1);
      for (int u = start; u < stop; ++u) {
        cd acc{0.0, 0.0};
        for (int l = 0; l < L; ++l) {
          const int w = u - l;
          if (w >= start && w < start + region) acc += amp * z((w - start) % L) * g[l];
        }
        const double t = static_cast<double>(time_origin + u);
        pf.samples(m, u) += unit(kTwoPi * cfos[k] * t / config.subcarriers) * acc;
      }
    }
  }
  if (noise_var > 0.0)
    for (int u = 0; u < total_length; ++u)
      for (int m = 0; m < M; ++m) pf.samples(m, u) += rng.complex_normal(noise_var);
  return pf;
}

double mean_body_power(const ReceivedFrame& frame) {
  double acc = 0.0;
  for (int m = 0; m < frame.antennas(); ++m)
    for (int b = 0; b < frame.blocks(); ++b)
      for (int u = 0; u < frame.length; ++u) acc += std::norm(frame.at(m, b, u));
  return acc / (static_cast<double>(frame.antennas()) * frame.blocks() * frame.length);
}

}  // namespace rissim
