#include "rissim/estimators.hpp"

#include <cmath>
#include <numbers>

namespace rissim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// [k][m][b][l] per-block CIRs -> [k][m][r][l] via Phi^H / (R+1).
Tensor4 unstack_paths(const Tensor4& gbar, const RisSchedule& schedule) {
  const auto [K, M, B, L] = gbar.dims();
  const CMatrix inv = schedule.inverse();
  const std::size_t P = inv.cols();
  Tensor4 g({K, M, P, L});
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t b = 0; b < B; ++b) {
        auto src = gbar.row(k, m, b);
        for (std::size_t r = 0; r < P; ++r) {
          const cd w = inv(b, r);
          auto dst = g.row(k, m, r);
          for (std::size_t l = 0; l < L; ++l) dst[l] += src[l] * w;
        }
      }
  return g;
}

Tensor4 empty_gbar(int K, int M, int B, int L) {
  return Tensor4({static_cast<std::size_t>(K), static_cast<std::size_t>(M),
                  static_cast<std::size_t>(B), static_cast<std::size_t>(L)});
}

/// Per-user OFDMA LS on a frequency-domain frame, results into gbar[k].
void ofdma_user_ls(const Tensor3& freq, const PilotPlan& plan, int k, int L, Tensor4& gbar) {
  const CMatrix lambda = ofdma_pilot_matrix(plan, k, L);
  Eigen::ColPivHouseholderQR<CMatrix> qr(lambda);
  if (qr.rank() < L)
    throw EstimationError("OFDMA pilot matrix of user " + std::to_string(k) + " is rank deficient");
  const CMatrix gram = lambda.adjoint() * lambda;
  const CMatrix pinv = gram.llt().solve(lambda.adjoint());
  const auto& gamma = plan.allocation[k];
  const int M = static_cast<int>(freq.dim(0)), B = static_cast<int>(freq.dim(1));
  const int ns = static_cast<int>(gamma.size());
  CMatrix rk(ns, B);
  for (int m = 0; m < M; ++m) {
    for (int b = 0; b < B; ++b)
      for (int i = 0; i < ns; ++i) rk(i, b) = freq(m, b, gamma[i]);
    const CMatrix est = pinv * rk;
    for (int b = 0; b < B; ++b) {
      auto dst = gbar.row(k, m, b);
      for (int l = 0; l < L; ++l) dst[l] = est(l, b);
    }
  }
}

}  // namespace

CfoEstimate estimate_cfo_proposed(const ReceivedFrame& frame, const SystemConfig& config) {
  const int K = config.users, L = config.taps, cp = frame.cp_length;
  const int per_user = frame.blocks() / K;
  if (per_user < 1) throw ConfigError("R+1 < K: some user owns no pilot block");
  const int u1 = L - 1, u2 = L - 1 - cp;
  CfoEstimate est;
  est.lag = cp;
  for (int k = 0; k < K; ++k) {
    cd c{0.0, 0.0};
    for (int i = 0; i < per_user; ++i) {
      const int b = i * K + k;
      for (int m = 0; m < frame.antennas(); ++m)
        c += std::conj(frame.at(m, b, u2)) * frame.at(m, b, u1);
    }
    est.eps_hat.push_back(frame.cfo_reference * std::arg(c) / (kTwoPi * cp));
  }
  return est;
}

CirEstimate estimate_cir_proposed(const ReceivedFrame& frame, const CfoEstimate& cfo,
                                  const PilotPlan& plan, const RisSchedule& schedule,
                                  const SystemConfig& config) {
  if (plan.scheme != Scheme::kProposed) throw ConfigError("proposed estimator needs the proposed plan");
  const int K = config.users, L = config.taps, N = frame.length, M = frame.antennas();
  const int B = frame.blocks();
  if (N != K * L || plan.length != N) throw DimensionError("proposed frame must have N = K*L");
  if (static_cast<int>(cfo.eps_hat.size()) != K) throw DimensionError("one CFO estimate per user");

  Tensor4 gbar = empty_gbar(K, M, B, L);
  CMatrix x(N, K * L);
  CMatrix y(N, M);
  for (int b = 0; b < B; ++b) {
    for (int k = 0; k < K; ++k) {
      auto p = plan.time_pilots.row(k, b);
      for (int u = 0; u < N; ++u) {
        const cd ramp = frame.ramp(cfo.eps_hat[k], b, u);
        for (int l = 0; l < L; ++l) x(u, k * L + l) = ramp * p[(u - l + N) % N];
      }
    }
    for (int m = 0; m < M; ++m)
      for (int u = 0; u < N; ++u) y(u, m) = frame.at(m, b, u);
    Eigen::PartialPivLU<CMatrix> lu(x);
    if (!(lu.rcond() > 1e-13))
      throw EstimationError("pilot matrix singular at t=" + std::to_string(K) + ", b=" +
                            std::to_string(b));
    const CMatrix sol = lu.solve(y);
    for (int k = 0; k < K; ++k)
      for (int m = 0; m < M; ++m) {
        auto dst = gbar.row(k, m, b);
        for (int l = 0; l < L; ++l) dst[l] = sol(k * L + l, m);
      }
  }
  return {unstack_paths(gbar, schedule), Scheme::kProposed};
}

CMatrix ofdma_pilot_matrix(const PilotPlan& plan, int k, int taps) {
  if (plan.scheme != Scheme::kOfdma) throw ConfigError("OFDMA pilot matrix needs the OFDMA plan");
  const int N = plan.length;
  const auto& gamma = plan.allocation.at(k);
  const CVector& s = plan.freq_pilots.at(k);
  const CMatrix f = dft_truncated(N, taps);
  const double root_n = std::sqrt(static_cast<double>(N));
  CMatrix lambda(static_cast<int>(gamma.size()), taps);
  for (int i = 0; i < static_cast<int>(gamma.size()); ++i)
    lambda.row(i) = root_n * s(i) * f.row(gamma[i]);
  return lambda;
}

CirEstimate estimate_cir_ofdma(const Tensor3& freq_frame, const PilotPlan& plan,
                               const RisSchedule& schedule, const SystemConfig& config) {
  const int K = config.users, L = config.taps;
  const int M = static_cast<int>(freq_frame.dim(0)), B = static_cast<int>(freq_frame.dim(1));
  if (static_cast<int>(freq_frame.dim(2)) != plan.length) throw DimensionError("frame length mismatch");
  Tensor4 gbar = empty_gbar(K, M, B, L);
  for (int k = 0; k < K; ++k) ofdma_user_ls(freq_frame, plan, k, L, gbar);
  return {unstack_paths(gbar, schedule), Scheme::kOfdma};
}

CirEstimate estimate_cir_ofdma_compensated(const ReceivedFrame& frame, const CfoEstimate& cfo,
                                           const PilotPlan& plan, const RisSchedule& schedule,
                                           const SystemConfig& config) {
  const int K = config.users, L = config.taps;
  Tensor4 gbar = empty_gbar(K, frame.antennas(), frame.blocks(), L);
  for (int k = 0; k < K; ++k) {
    const Tensor3 freq = to_frequency(derotate(frame, cfo.eps_hat.at(k)));
    ofdma_user_ls(freq, plan, k, L, gbar);
  }
  return {unstack_paths(gbar, schedule), Scheme::kOfdma};
}

CfoEstimate estimate_cfo_ofdma_preamble(const PreambleFrame& preamble, const SystemConfig& config) {
  const int L = preamble.taps;
  const int region = preamble.region_length;
  if (region < 2 * L) throw DimensionError("preamble region shorter than two pilot periods");
  CfoEstimate est;
  est.lag = L;
  const int ref = preamble.cfo_reference > 0 ? preamble.cfo_reference : config.subcarriers;
  for (int start : preamble.region_start) {
    cd c{0.0, 0.0};
    for (int u = start + 2 * L - 1; u < start + region; ++u)
      for (int m = 0; m < preamble.samples.rows(); ++m)
        c += std::conj(preamble.samples(m, u - L)) * preamble.samples(m, u);
    est.eps_hat.push_back(ref * std::arg(c) / (kTwoPi * L));
  }
  return est;
}

std::pair<CfoEstimate, CirEstimate> estimate_joint_tdma(const ReceivedFrame& frame,
                                                        const PilotPlan& plan,
                                                        const RisSchedule& schedule,
                                                        const SystemConfig& config) {
  if (plan.scheme != Scheme::kTdma) throw ConfigError("TDMA estimator needs the TDMA plan");
  const int K = config.users, L = config.taps, N = frame.length, M = frame.antennas();
  const int B = frame.blocks();
  const int slot = plan.slot_length();
  if (slot < 2 * L) throw ConfigError("Tdma requires N_T >= 2L");

  CfoEstimate cfo;
  cfo.lag = L;
  for (int k = 0; k < K; ++k) {
    const int s = plan.slot_start(k);
    cd c{0.0, 0.0};
    for (int b = 0; b < B; ++b)
      for (int m = 0; m < M; ++m)
        for (int u = s + 2 * L - 1; u < s + slot; ++u)
          c += std::conj(frame.at(m, b, u - L)) * frame.at(m, b, u);
    cfo.eps_hat.push_back(frame.cfo_reference * std::arg(c) / (kTwoPi * L));
  }

  Tensor4 gbar = empty_gbar(K, M, B, L);
  const int rows = slot - L + 1;
  CMatrix x(rows, L);
  CMatrix y(rows, M);
  for (int k = 0; k < K; ++k) {
    const int s = plan.slot_start(k);
    for (int b = 0; b < B; ++b) {
      auto p = plan.time_pilots.row(k, b);
      for (int i = 0; i < rows; ++i) {
        const int u = s + L - 1 + i;
        const cd ramp = frame.ramp(cfo.eps_hat[k], b, u);
        for (int l = 0; l < L; ++l) x(i, l) = ramp * p[(u - l + N) % N];
        for (int m = 0; m < M; ++m) y(i, m) = frame.at(m, b, u);
      }
      Eigen::ColPivHouseholderQR<CMatrix> qr(x);
      if (qr.rank() < L)
        throw EstimationError("TDMA pilot matrix rank deficient for user " + std::to_string(k) +
                              ", block " + std::to_string(b));
      const CMatrix sol = qr.solve(y);
      for (int m = 0; m < M; ++m) {
        auto dst = gbar.row(k, m, b);
        for (int l = 0; l < L; ++l) dst[l] = sol(l, m);
      }
    }
  }
  return {cfo, {unstack_paths(gbar, schedule), Scheme::kTdma}};
}

}  // namespace rissim
