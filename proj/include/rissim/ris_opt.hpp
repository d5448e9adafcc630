#pragma once

#include <vector>

#include "rissim/core.hpp"

namespace rissim {

struct RisPhases {
  CVector phi_d;  // length R+1, entry 0 is 1
};

struct RateModel {
  Tensor4 h_hat;   // [k][m][r][n]
  CMatrix gamma;   // K x N weights
  double power = 1.0;
  double noise_var = 1.0;
  double upsilon = 1.0;
  int n = 0;
  int l_cp = 0;

  /// Model with unit weights.
  static RateModel from_cfr(Tensor4 h_hat, double power, double noise_var, double upsilon,
                            int l_cp);
  int paths() const { return static_cast<int>(h_hat.dim(2)); }
};

struct RateValue {
  double f1 = 0.0;  // bits per sample
  double f2 = 0.0;  // nats
};

struct PgmParams {
  double mu0 = 1000.0;
  double rho = 0.5;
  double delta_phi = 1e-5;
  int max_iters = 500;
  double tol = 1e-10;
  int max_backtracks = 60;

  void validate() const;
};

struct PgmResult {
  RisPhases phases;
  std::vector<double> trace;  // f2 per iterate, starting with the initial point
  int iterations = 0;
  bool line_search_exhausted = false;
};

RateValue achievable_rate(const RisPhases& phi, const RateModel& model);
/// Wirtinger gradient of f2 w.r.t. conj(phi_r), r = 1..R.
CVector rate_gradient(const RisPhases& phi, const RateModel& model);
CVector project_unit_modulus(const CVector& phi_raw);
RisPhases all_ones_phases(int r);

PgmResult pgm_optimize(const RateModel& model, const PgmParams& params, const RisPhases& init);
RisPhases grid_search(const RateModel& model, int levels);

}  // namespace rissim
