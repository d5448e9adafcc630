#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "rissim/core.hpp"
#include "rissim/random.hpp"

namespace rissim {

using Point3 = Eigen::Vector3d;

struct Geometry {
  Point3 ris_midpoint{0.0, 0.0, 0.0};
  double ris_spacing = 0.0;
  std::pair<int, int> ris_grid{0, 0};
  Point3 bs_midpoint{200.0, 200.0, 0.0};
  double bs_spacing = 0.0;
  std::vector<Point3> user_positions;
  double tx_gain = 2.0;
  double rx_gain = 2.0;

  /// Default deployment: users at (200 + k, -200, 0), half-wavelength spacings.
  static Geometry defaults(const SystemConfig& config);
  void validate(const SystemConfig& config) const;
};

/// Most-square (rows, cols) factorization of r with rows <= cols.
std::pair<int, int> ris_grid_for(int r);

double path_loss(const Geometry& geometry, int user, double wavelength);

struct ChannelSet {
  Tensor4 taps;  // [k][m][r][l]
  double kappa_db = 0.0;
  std::vector<double> per_user_gain;

  int users() const { return static_cast<int>(taps.dim(0)); }
  int antennas() const { return static_cast<int>(taps.dim(1)); }
  int paths() const { return static_cast<int>(taps.dim(2)); }
  int taps_per_path() const { return static_cast<int>(taps.dim(3)); }
};

ChannelSet generate_channels(const SystemConfig& config, const Geometry& geometry,
                             RandomStream& rng);

/// h[k][m][r][n] = F_{n,L} g[k][m][r].
Tensor4 cfr_from_cir(const ChannelSet& channels, int n);
Tensor4 cfr_from_cir(const Tensor4& taps, int n);

/// Effective CIR of every block: gbar[k][m][b][l] = sum_r g[k][m][r][l] phi[r][b].
Tensor4 effective_cir(const Tensor4& taps, const CMatrix& reflection);

}  // namespace rissim
