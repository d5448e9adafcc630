#pragma once

#include <utility>
#include <vector>

#include "rissim/airlink.hpp"

namespace rissim {

struct CfoEstimate {
  std::vector<double> eps_hat;
  double lag = 0.0;
};

struct CirEstimate {
  Tensor4 g_hat;  // [k][m][r][l]
  Scheme scheme = Scheme::kProposed;
};

CfoEstimate estimate_cfo_proposed(const ReceivedFrame& frame, const SystemConfig& config);

CirEstimate estimate_cir_proposed(const ReceivedFrame& frame, const CfoEstimate& cfo,
                                  const PilotPlan& plan, const RisSchedule& schedule,
                                  const SystemConfig& config);

/// LS matrix of user k: sqrt(N) Gamma_k^T diag(s_k) F_{N,L}.
CMatrix ofdma_pilot_matrix(const PilotPlan& plan, int k, int taps);

CirEstimate estimate_cir_ofdma(const Tensor3& freq_frame, const PilotPlan& plan,
                               const RisSchedule& schedule, const SystemConfig& config);

/// OFDMA LS after per-user derotation of the time-domain frame by the estimated CFOs.
CirEstimate estimate_cir_ofdma_compensated(const ReceivedFrame& frame, const CfoEstimate& cfo,
                                           const PilotPlan& plan, const RisSchedule& schedule,
                                           const SystemConfig& config);

CfoEstimate estimate_cfo_ofdma_preamble(const PreambleFrame& preamble, const SystemConfig& config);

std::pair<CfoEstimate, CirEstimate> estimate_joint_tdma(const ReceivedFrame& frame,
                                                        const PilotPlan& plan,
                                                        const RisSchedule& schedule,
                                                        const SystemConfig& config);

}  // namespace rissim
