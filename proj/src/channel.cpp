#include "rissim/channel.hpp"

#include <cmath>
#include <numbers>

namespace rissim {

std::pair<int, int> ris_grid_for(int r) {
  if (r <= 0) return {1, 0};
  int rows = static_cast<int>(std::sqrt(static_cast<double>(r)));
  while (rows > 1 && r % rows != 0) --rows;
  return {rows, r / rows};
}

Geometry Geometry::defaults(const SystemConfig& config) {
  Geometry g;
  const double half = config.wavelength() / 2.0;
  g.ris_spacing = half;
  g.bs_spacing = half;
  g.ris_grid = ris_grid_for(config.ris_elements);
  for (int k = 0; k < config.users; ++k) g.user_positions.emplace_back(200.0 + k, -200.0, 0.0);
  return g;
}

void Geometry::validate(const SystemConfig& config) const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw GeometryError("geometry constraint violated: " + what);
  };
  need(static_cast<int>(user_positions.size()) == config.users, "one user position per user");
  need(ris_grid.first * ris_grid.second == config.ris_elements, "ris_grid rows*cols = R");
  need(ris_spacing > 0.0 && bs_spacing > 0.0, "positive element spacings");
  need(tx_gain > 0.0 && rx_gain > 0.0, "positive antenna gains");
  need(bs_midpoint.x() >= 0.0 && bs_midpoint.y() >= 0.0 && bs_midpoint.z() == 0.0,
       "BS in the xy-plane with x, y >= 0");
  for (const auto& u : user_positions)
    need(u.x() >= 0.0 && u.y() <= 0.0 && u.z() == 0.0, "users in the xy-plane with x >= 0, y <= 0");
}

double path_loss(const Geometry& geometry, int user, double wavelength) {
  if (user < 0 || user >= static_cast<int>(geometry.user_positions.size()))
    throw DimensionError("user index out of range");
  const Point3 to_user = geometry.user_positions[user] - geometry.ris_midpoint;
  const Point3 to_bs = geometry.bs_midpoint - geometry.ris_midpoint;
  const double d_ur = to_user.norm();
  const double d_rb = to_bs.norm();
  if (d_ur <= 0.0 || d_rb <= 0.0) throw GeometryError("terminal coincides with the RIS midpoint");
  const double cos_t = to_user.x() / d_ur;
  const double cos_r = to_bs.x() / d_rb;
  if (cos_t <= 0.0 || cos_r <= 0.0) throw GeometryError("terminal behind the RIS plane");
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double lam4 = std::pow(wavelength, 4);
  return 256.0 * pi2 * d_ur * d_ur * d_rb * d_rb /
         (geometry.tx_gain * geometry.rx_gain * lam4 * cos_t * cos_r);
}

ChannelSet generate_channels(const SystemConfig& config, const Geometry& geometry,
                             RandomStream& rng) {
  const int K = config.users, M = config.antennas, P = config.blocks(), L = config.taps;
  ChannelSet ch;
  ch.kappa_db = config.kappa_db;
  ch.taps = Tensor4({static_cast<std::size_t>(K), static_cast<std::size_t>(M),
                     static_cast<std::size_t>(P), static_cast<std::size_t>(L)});
  const double scatter_var = L > 1 ? std::pow(10.0, -config.kappa_db / 10.0) / (L - 1) : 0.0;
  for (int k = 0; k < K; ++k) {
    const double gain = std::sqrt(1.0 / path_loss(geometry, k, config.wavelength()));
    ch.per_user_gain.push_back(gain);
    for (int m = 0; m < M; ++m)
      for (int r = 0; r < P; ++r) {
        auto g = ch.taps.row(k, m, r);
        g[0] = gain;
        for (int l = 1; l < L; ++l) g[l] = gain * rng.complex_normal(scatter_var);
      }
  }
  return ch;
}

Tensor4 cfr_from_cir(const ChannelSet& channels, int n) { return cfr_from_cir(channels.taps, n); }

Tensor4 cfr_from_cir(const Tensor4& taps, int n) {
  const auto [K, M, P, L] = taps.dims();
  if (static_cast<int>(L) > n) throw DimensionError("CIR longer than the subcarrier count");
  const CMatrix f = dft_truncated(n, static_cast<int>(L));
  Tensor4 h({K, M, P, static_cast<std::size_t>(n)});
  // gather all CIRs as columns, one product
  CMatrix g(L, K * M * P);
  for (std::size_t c = 0; c < K * M * P; ++c)
    for (std::size_t l = 0; l < L; ++l) g(l, c) = taps.data()[c * L + l];
  const CMatrix hh = f * g;
  for (std::size_t c = 0; c < K * M * P; ++c)
    for (int p = 0; p < n; ++p) h.data()[c * n + p] = hh(p, c);
  return h;
}

Tensor4 effective_cir(const Tensor4& taps, const CMatrix& reflection) {
  const auto [K, M, P, L] = taps.dims();
  if (static_cast<std::size_t>(reflection.rows()) != P)
    throw DimensionError("reflection rows must equal the path count");
  const std::size_t B = reflection.cols();
  Tensor4 out({K, M, B, L});
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t b = 0; b < B; ++b) {
        auto dst = out.row(k, m, b);
        for (std::size_t r = 0; r < P; ++r) {
          const cd w = reflection(r, b);
          auto src = taps.row(k, m, r);
          for (std::size_t l = 0; l < L; ++l) dst[l] += src[l] * w;
        }
      }
  return out;
}

}  // namespace rissim
