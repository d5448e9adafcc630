#pragma once

#include <vector>

#include "rissim/channel.hpp"
#include "rissim/core.hpp"
#include "rissim/random.hpp"

namespace rissim {

struct PilotPlan {
  Scheme scheme = Scheme::kProposed;
  int length = 0;                          // samples per block body
  Tensor3 time_pilots;                     // [k][b][u]
  std::vector<CVector> freq_pilots;        // Ofdma: s~_k on the user's subcarriers
  std::vector<std::vector<int>> allocation;  // Ofdma: Gamma_k

  int users() const { return static_cast<int>(time_pilots.dim(0)); }
  int blocks() const { return static_cast<int>(time_pilots.dim(1)); }
  /// First sample of user k's slot (Tdma).
  int slot_start(int k) const { return k * (length / users()); }
  int slot_length() const { return length / users(); }
};

/// Frame length each scheme uses for the configured N.
int frame_length(Scheme scheme, const SystemConfig& config);

/// Number of zero samples ahead of user k's periodic pilot in block b (proposed plan).
int proposed_zero_prefix(int k, int b, int users, int taps);

PilotPlan build_pilots(Scheme scheme, const SystemConfig& config);

struct ReceivedFrame {
  Tensor3 samples;  // [m][b][v], v = u + cp_length, u in [-cp_length, N)
  int cp_length = 0;
  int length = 0;
  int cfo_reference = 0;  // N that normalizes the CFO phase ramp
  long long time_origin = 0;
  double noise_var = 0.0;
  std::vector<double> cfos;  // for scoring only

  int antennas() const { return static_cast<int>(samples.dim(0)); }
  int blocks() const { return static_cast<int>(samples.dim(1)); }
  int symbol_length() const { return length + cp_length; }
  cd at(int m, int b, int u) const { return samples(m, b, u + cp_length); }
  /// Absolute sample index of position u in block b, used by the CFO phase ramp.
  double time_index(int b, int u) const {
    return static_cast<double>(time_origin + static_cast<long long>(b) * symbol_length() + u);
  }
  /// e^{j 2 pi eps t / N_ref} at position u of block b.
  cd ramp(double eps, int b, int u) const;
};

struct SynthesisSetup {
  int cp_length = 0;
  int cfo_reference = 0;
  long long time_origin = 0;
  double noise_var = 0.0;
};

/// General synthesis: tx[k][b][u] bodies, reflection vectors per block in the columns of `reflection`.
ReceivedFrame synthesize_blocks(const Tensor3& tx, const Tensor4& taps, const CMatrix& reflection,
                                const std::vector<double>& cfos, const SynthesisSetup& setup,
                                RandomStream& rng);

ReceivedFrame synthesize_uplink(const PilotPlan& plan, const ChannelSet& channels,
                                const std::vector<double>& cfos, const RisSchedule& schedule,
                                const SystemConfig& config, RandomStream& rng,
                                long long time_origin = 0);

/// r[m][b] = F_N y[m][b][0..N).
Tensor3 to_frequency(const ReceivedFrame& frame);

/// Undo user k's CFO ramp on the block bodies (u in [0, N)).
ReceivedFrame derotate(const ReceivedFrame& frame, double eps);

struct PreambleFrame {
  CMatrix samples;  // M x total
  std::vector<int> region_start;
  int region_length = 0;
  int taps = 0;
  int cfo_reference = 0;
  double noise_var = 0.0;
  std::vector<double> cfos;
};

/// Preamble sample count per policy (2L(R+1) natively).
int preamble_length(const SystemConfig& config, bool matched_budget);

PreambleFrame synthesize_preamble(int total_length, const ChannelSet& channels,
                                  const std::vector<double>& cfos, const SystemConfig& config,
                                  long long time_origin, double noise_var, RandomStream& rng);

/// Mean |y|^2 over the block bodies.
double mean_body_power(const ReceivedFrame& frame);

}  // namespace rissim
