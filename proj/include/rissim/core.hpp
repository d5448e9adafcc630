#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "rissim/errors.hpp"
#include "rissim/tensor.hpp"

namespace rissim {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Scheme { kProposed, kTdma, kOfdma };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct SystemConfig {
  int subcarriers = 96;   // N
  int users = 3;          // K
  int taps = 32;          // L
  int cp_length = 34;     // L_cp
  int antennas = 16;      // M
  int ris_elements = 8;   // R
  double snr_db = 10.0;
  double tx_power = 1.0;
  double noise_var = 0.0;  // filled by calibration unless given explicitly
  double upsilon = 1.0;
  double carrier_freq_hz = 2e9;
  std::uint64_t master_seed = 20240601;
  double kappa_db = 4.0;

  int symbol_length() const { return subcarriers + cp_length; }
  int blocks() const { return ris_elements + 1; }
  double wavelength() const;

  /// Scheme-independent checks (positivity, CP length).
  void validate() const;
  /// Dimension constraints of one pilot scheme for a frame of `frame_length` samples.
  void validate_for(Scheme scheme, int frame_length) const;
};

constexpr double kSpeedOfLight = 299792458.0;

CMatrix dft_matrix(int n);
CMatrix dft_truncated(int n, int l);

CVector zadoff_chu(int length, int root);
/// Root of user `user` (0-based): the (user+1)-th smallest positive integer coprime to `length`.
int zc_root_for_user(int length, int user);

struct RisSchedule {
  CMatrix phi;  // (R+1) x (R+1), column b is the reflection vector of block b

  int blocks() const { return static_cast<int>(phi.cols()); }
  CMatrix inverse() const { return phi.adjoint() / static_cast<double>(phi.rows()); }
};

RisSchedule ris_training_schedule(int r);

/// Frequency-domain CFO kernel sin(pi a)/(n sin(pi a / n)) e^{j pi (n-1) a / n}.
cd cfo_kernel(double a, int n);

}  // namespace rissim
