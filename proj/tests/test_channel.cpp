#include <doctest.h>

#include <cmath>

#include "rissim/channel.hpp"

using namespace rissim;

namespace {

Geometry simple_geometry(const Point3& user, const Point3& bs, double gt = 2.0, double gr = 2.0) {
  Geometry g;
  g.user_positions = {user};
  g.bs_midpoint = bs;
  g.tx_gain = gt;
  g.rx_gain = gr;
  g.ris_spacing = g.bs_spacing = 0.075;
  return g;
}

}  // namespace

TEST_CASE("path loss at normal incidence") {
  const double d = 50.0, lam = 0.15;
  const Geometry g = simple_geometry({d, 0, 0}, {d, 0, 0});
  const double want = 256.0 * M_PI * M_PI * std::pow(d, 4) / (4.0 * std::pow(lam, 4));
  CHECK(path_loss(g, 0, lam) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("path loss in the default deployment") {
  const Geometry g = simple_geometry({200, -200, 0}, {200, 200, 0});
  // d^2 = 2 * 200^2 on both hops, cos = 1/sqrt(2) on both sides
  const double want = 256.0 * 9.869604401089358 * 80000.0 * 80000.0 /
                      (2.0 * 2.0 * 0.00050625 * 0.7071067811865476 * 0.7071067811865476);
  CHECK(path_loss(g, 0, 0.15) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("path loss scaling, symmetry and monotonicity") {
  const Geometry a = simple_geometry({100, -40, 0}, {80, 120, 0});
  const Geometry b = simple_geometry({200, -80, 0}, {160, 240, 0});
  CHECK(path_loss(b, 0, 0.1) / path_loss(a, 0, 0.1) == doctest::Approx(16.0).epsilon(1e-12));

  const Geometry g1 = simple_geometry({100, -40, 0}, {80, 120, 0}, 2.0, 5.0);
  const Geometry g2 = simple_geometry({100, -40, 0}, {80, 120, 0}, 5.0, 2.0);
  CHECK(path_loss(g1, 0, 0.1) == doctest::Approx(path_loss(g2, 0, 0.1)).epsilon(1e-14));

  // moving along the incidence ray keeps the angle and grows the distance
  double prev = 0.0;
  for (double s : {1.0, 1.5, 2.0, 3.0}) {
    const double v = path_loss(simple_geometry({100 * s, -40 * s, 0}, {80, 120, 0}), 0, 0.1);
    CHECK(v > prev);
    prev = v;
  }
  prev = 0.0;
  for (double s : {1.0, 1.5, 2.0, 3.0}) {
    const double v = path_loss(simple_geometry({100, -40, 0}, {80 * s, 120 * s, 0}), 0, 0.1);
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("path loss rejects terminals behind the surface") {
  CHECK_THROWS_AS(path_loss(simple_geometry({-10, -5, 0}, {10, 10, 0}), 0, 0.1), GeometryError);
  CHECK_THROWS_AS(path_loss(simple_geometry({10, -5, 0}, {0, 10, 0}), 0, 0.1), GeometryError);
}

TEST_CASE("default geometry") {
  SystemConfig c;
  const Geometry g = Geometry::defaults(c);
  REQUIRE(g.user_positions.size() == 3);
  CHECK(g.user_positions[2].x() == 202.0);
  CHECK(g.user_positions[2].y() == -200.0);
  CHECK(g.ris_grid.first * g.ris_grid.second == 8);
  CHECK(g.ris_spacing == doctest::Approx(kSpeedOfLight / 2e9 / 2.0));
  CHECK_NOTHROW(g.validate(c));
  CHECK(ris_grid_for(9) == std::make_pair(3, 3));
  CHECK(ris_grid_for(7) == std::make_pair(1, 7));
}

TEST_CASE("generate_channels shape and deterministic first tap") {
  SystemConfig c;
  c.antennas = 4;
  const Geometry g = Geometry::defaults(c);
  RandomStream rs(1);
  const ChannelSet ch = generate_channels(c, g, rs);
  CHECK(ch.taps.dim(0) == 3);
  CHECK(ch.taps.dim(1) == 4);
  CHECK(ch.taps.dim(2) == 9);
  CHECK(ch.taps.dim(3) == 32);
  for (int k = 0; k < 3; ++k) {
    const double gain = std::sqrt(1.0 / path_loss(g, k, c.wavelength()));
    CHECK(ch.per_user_gain[k] == doctest::Approx(gain).epsilon(1e-14));
    for (int m = 0; m < 4; ++m)
      for (int r = 0; r < 9; ++r) CHECK(ch.taps(k, m, r, 0) == cd(gain, 0.0));
  }
}

TEST_CASE("generate_channels is reproducible") {
  SystemConfig c;
  const Geometry g = Geometry::defaults(c);
  RandomStream a(42), b(42);
  CHECK(generate_channels(c, g, a).taps == generate_channels(c, g, b).taps);
}

TEST_CASE("rician limit removes scattering") {
  SystemConfig c;
  c.kappa_db = 300.0;
  c.antennas = 2;
  const Geometry g = Geometry::defaults(c);
  RandomStream rs(3);
  const ChannelSet ch = generate_channels(c, g, rs);
  for (int k = 0; k < 3; ++k) {
    const double p0 = std::norm(ch.taps(k, 0, 0, 0));
    double s = 0.0;
    for (int l = 1; l < 32; ++l) s += std::norm(ch.taps(k, 1, 3, l));
    CHECK(s / 31.0 < 1e-25 * p0);
  }
}

TEST_CASE("power ratio of first tap to scattered taps matches kappa") {
  SystemConfig c;
  c.users = 1;
  c.antennas = 1;
  c.ris_elements = 0;
  c.kappa_db = 4.0;
  const Geometry g = Geometry::defaults(c);
  RandomStream rs(2024);
  double tap0 = 0.0, scatter = 0.0, total = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const ChannelSet ch = generate_channels(c, g, rs);
    auto row = ch.taps.row(0, 0, 0);
    tap0 += std::norm(row[0]);
    double s = 0.0;
    for (int l = 1; l < 32; ++l) s += std::norm(row[l]);
    scatter += s;
    total += std::norm(row[0]) + s;
  }
  CHECK(tap0 / scatter == doctest::Approx(std::pow(10.0, 0.4)).epsilon(0.02));
  const double rho = path_loss(g, 0, c.wavelength());
  CHECK(total / draws == doctest::Approx((1.0 + std::pow(10.0, -0.4)) / rho).epsilon(0.02));
}

TEST_CASE("cfr_from_cir") {
  Tensor4 g({1, 1, 1, 4});
  g(0, 0, 0, 0) = 1.0;
  const Tensor4 h = cfr_from_cir(g, 16);
  for (int n = 0; n < 16; ++n) CHECK(std::abs(h(0, 0, 0, n) - cd(0.25, 0.0)) < 1e-15);

  const Tensor4 z = cfr_from_cir(Tensor4({2, 2, 2, 4}), 8);
  for (const cd& v : z.data()) CHECK(v == cd(0.0, 0.0));

  RandomStream rs(7);
  Tensor4 r({2, 3, 2, 32});
  for (auto& v : r.data()) v = rs.complex_normal(1.0);
  const Tensor4 hr = cfr_from_cir(r, 96);
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 3; ++m)
      for (int p = 0; p < 2; ++p) {
        double eg = 0.0, eh = 0.0;
        for (int l = 0; l < 32; ++l) eg += std::norm(r(k, m, p, l));
        for (int n = 0; n < 96; ++n) eh += std::norm(hr(k, m, p, n));
        CHECK(eh == doctest::Approx(eg).epsilon(1e-12));
      }
  CHECK_THROWS_AS(cfr_from_cir(r, 16), DimensionError);
}

TEST_CASE("effective CIR is the reflection-weighted path sum") {
  RandomStream rs(8);
  Tensor4 g({2, 2, 3, 4});
  for (auto& v : g.data()) v = rs.complex_normal(1.0);
  CMatrix refl(3, 2);
  for (int i = 0; i < 6; ++i) refl(i % 3, i / 3) = rs.complex_normal(1.0);
  const Tensor4 e = effective_cir(g, refl);
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 2; ++m)
      for (int b = 0; b < 2; ++b)
        for (int l = 0; l < 4; ++l) {
          cd want{0.0, 0.0};
          for (int r = 0; r < 3; ++r) want += g(k, m, r, l) * refl(r, b);
          CHECK(std::abs(e(k, m, b, l) - want) < 1e-14);
        }
}
