#include "rissim/core.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace rissim {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kProposed: return "proposed";
    case Scheme::kTdma: return "tdma";
    case Scheme::kOfdma: return "ofdma";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  std::string n;
  for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (n == "proposed") return Scheme::kProposed;
  if (n == "tdma") return Scheme::kTdma;
  if (n == "ofdma") return Scheme::kOfdma;
  throw ConfigError("unknown scheme '" + name + "' (expected Proposed, Tdma or Ofdma)");
}

double SystemConfig::wavelength() const { return kSpeedOfLight / carrier_freq_hz; }

void SystemConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("constraint violated: " + what);
  };
  need(subcarriers >= 1, "N >= 1");
  need(users >= 1, "K >= 1");
  need(taps >= 1, "L >= 1");
  need(antennas >= 1, "M >= 1");
  need(ris_elements >= 0, "R >= 0");
  need(cp_length >= taps, "L_cp >= L");
  need(tx_power > 0.0, "tx_power > 0");
  need(upsilon >= 1.0, "upsilon >= 1");
  need(carrier_freq_hz > 0.0, "carrier_freq_hz > 0");
  need(noise_var >= 0.0, "noise_var >= 0");
  need(std::isfinite(snr_db), "snr_db finite");
}

void SystemConfig::validate_for(Scheme scheme, int n) const {
  validate();
  const int k = users;
  const int l = taps;
  switch (scheme) {
    case Scheme::kProposed:
      if (n != k * l)
        throw ConfigError("Proposed scheme requires N = K*L (N=" + std::to_string(n) +
                          ", K*L=" + std::to_string(k * l) + ")");
      if (blocks() < k)
        throw ConfigError("Proposed scheme requires R+1 >= K so every user owns a block");
      break;
    case Scheme::kTdma:
      if (n % k != 0 || n < 2 * k * l)
        throw ConfigError("Tdma scheme requires N divisible by K and N >= 2*K*L (N=" +
                          std::to_string(n) + ")");
      break;
    case Scheme::kOfdma:
      if (n % k != 0 || n / k < l)
        throw ConfigError("Ofdma scheme requires N divisible by K and N/K >= L (N=" +
                          std::to_string(n) + ")");
      break;
  }
}

CMatrix dft_matrix(int n) { return dft_truncated(n, n); }

CMatrix dft_truncated(int n, int l) {
  if (n < 1 || l < 1) throw DimensionError("DFT dimensions must be positive");
  if (l > n) throw DimensionError("truncated DFT needs l <= n");
  CMatrix f(n, l);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < l; ++q) {
      // reduce p*q mod n first so the angle stays small
      const long long pq = (static_cast<long long>(p) * q) % n;
      const double a = -2.0 * std::numbers::pi * static_cast<double>(pq) / n;
      f(p, q) = scale * cd(std::cos(a), std::sin(a));
    }
  return f;
}

CVector zadoff_chu(int length, int root) {
  if (length < 1) throw DimensionError("ZC length must be positive");
  if (root < 1 || std::gcd(root, length) != 1)
    throw RangeError("ZC root " + std::to_string(root) + " is not coprime to length " +
                     std::to_string(length));
  CVector z(length);
  const long long two_l = 2LL * length;
  for (int n = 0; n < length; ++n) {
    const long long q = (length % 2 == 1) ? static_cast<long long>(n) * (n + 1)
                                           : static_cast<long long>(n) * n;
    const long long e = (static_cast<long long>(root) % two_l) * (q % two_l) % two_l;
    const double a = -std::numbers::pi * static_cast<double>(e) / length;
    z(n) = cd(std::cos(a), std::sin(a));
  }
  return z;
}

int zc_root_for_user(int length, int user) {
  int found = -1;
  for (int r = 1;; ++r) {
    if (std::gcd(r, length) == 1 && ++found == user) return r;
  }
}

RisSchedule ris_training_schedule(int r) {
  if (r < 0) throw DimensionError("RIS element count must be >= 0");
  const int n = r + 1;
  RisSchedule s;
  s.phi.resize(n, n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>((p * q) % n) / n;
      s.phi(p, q) = cd(std::cos(a), std::sin(a));
    }
  return s;
}

cd cfo_kernel(double a, int n) {
  const double pa = std::numbers::pi * a;
  const double den = n * std::sin(pa / n);
  // at integer multiples of n the sum is n ones
  if (std::abs(den) < 1e-300) return {1.0, 0.0};
  const double mag = std::sin(pa) / den;
  const double ph = std::numbers::pi * (n - 1) * a / n;
  return mag * cd(std::cos(ph), std::sin(ph));
}

}  // namespace rissim
