#include "rissim/datalink.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace rissim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

unsigned gray(unsigned i) { return i ^ (i >> 1); }

unsigned gray_inverse(unsigned g) {
  g ^= g >> 1;
  g ^= g >> 2;
  return g;
}

}  // namespace

cd psk16_modulate(unsigned word) {
  const unsigned pos = gray_inverse(word & 15u);
  const double a = kTwoPi * pos / kPskOrder;
  return {std::cos(a), std::sin(a)};
}

unsigned psk16_demodulate(cd symbol) {
  const double a = std::arg(symbol);
  long pos = std::lround(a * kPskOrder / kTwoPi);
  pos = ((pos % kPskOrder) + kPskOrder) % kPskOrder;
  return gray(static_cast<unsigned>(pos));
}

DataBurst build_data_burst(int users, int n, int blocks, double power, RandomStream& rng) {
  if (users < 1 || n % users != 0) throw DimensionError("data subcarriers must split evenly");
  const int ns = n / users;
  DataBurst burst;
  burst.subcarriers_per_user = ns;
  burst.tx = Tensor3({static_cast<std::size_t>(users), static_cast<std::size_t>(blocks),
                      static_cast<std::size_t>(n)});
  burst.words.assign(users, std::vector<unsigned>(static_cast<std::size_t>(blocks) * ns));
  const CMatrix fh = dft_matrix(n).adjoint();
  const double amp = std::sqrt(power);
  for (int k = 0; k < users; ++k)
    for (int b = 0; b < blocks; ++b) {
      CVector d = CVector::Zero(n);
      for (int i = 0; i < ns; ++i) {
        const unsigned w = static_cast<unsigned>(rng.bits() & 15u);
        burst.words[k][static_cast<std::size_t>(b) * ns + i] = w;
        d(k + i * users) = amp * psk16_modulate(w);
      }
      const CVector x = fh * d;
      auto dst = burst.tx.row(k, b);
      for (int u = 0; u < n; ++u) dst[u] = x(u);
    }
  return burst;
}

Tensor3 effective_cfr(const Tensor4& h, const CVector& phi) {
  const auto [K, M, P, N] = h.dims();
  if (static_cast<std::size_t>(phi.size()) != P) throw DimensionError("phase vector length mismatch");
  Tensor3 out({K, M, N});
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t m = 0; m < M; ++m) {
      auto dst = out.row(k, m);
      for (std::size_t r = 0; r < P; ++r) {
        auto src = h.row(k, m, r);
        const cd w = phi(static_cast<Eigen::Index>(r));
        for (std::size_t n = 0; n < N; ++n) dst[n] += src[n] * w;
      }
    }
  return out;
}

std::vector<std::vector<unsigned>> detect_burst(const ReceivedFrame& frame,
                                                const ReceiverState& state, int users) {
  const int N = frame.length, M = frame.antennas(), B = frame.blocks(), K = users;
  const int ns = N / K;
  if (static_cast<int>(state.eps.size()) != K || static_cast<int>(state.cfr.dim(0)) != K ||
      static_cast<int>(state.cfr.dim(1)) != M || static_cast<int>(state.cfr.dim(2)) != N)
    throw DimensionError("receiver state does not match the frame");
  const double ref = frame.cfo_reference;
  const double root_n = std::sqrt(static_cast<double>(N));
  const CMatrix f = dft_matrix(N);

  // C(m, (k,i)) = H_k,m at user k's i-th subcarrier
  CMatrix c(M, N);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < ns; ++i)
      for (int m = 0; m < M; ++m) c(m, k * ns + i) = state.cfr(k, m, k + i * K);
  const CMatrix base = c.adjoint() * c;

  // kernel tables f_s(d + eps_q - eps_k) for integer d in (-N, N)
  std::vector<std::vector<cd>> kern(static_cast<std::size_t>(K * K), std::vector<cd>(2 * N - 1));
  for (int k = 0; k < K; ++k)
    for (int q = 0; q < K; ++q)
      for (int d = -(N - 1); d < N; ++d)
        kern[k * K + q][d + N - 1] = cfo_kernel(d + state.eps[q] - state.eps[k], N);

  const double a2n = state.amplitude * state.amplitude * N;
  std::vector<std::vector<unsigned>> words(K, std::vector<unsigned>(static_cast<std::size_t>(B) * ns));
  CMatrix y(N, M);
  CMatrix gram(N, N);
  CVector z(N);
  for (int b = 0; b < B; ++b) {
    std::vector<double> theta(K);
    for (int k = 0; k < K; ++k) theta[k] = 2.0 * std::numbers::pi * state.eps[k] * frame.time_index(b, 0) / ref;
    for (int k = 0; k < K; ++k) {
      for (int m = 0; m < M; ++m)
        for (int u = 0; u < N; ++u) y(u, m) = frame.at(m, b, u) * std::conj(frame.ramp(state.eps[k], b, u));
      const CMatrix yf = f * y;
      for (int i = 0; i < ns; ++i) {
        const int p = k + i * K;
        cd acc{0.0, 0.0};
        for (int m = 0; m < M; ++m) acc += std::conj(c(m, k * ns + i)) * yf(p, m);
        z(k * ns + i) = root_n * state.amplitude * acc;
      }
    }
    for (int k = 0; k < K; ++k)
      for (int q = 0; q < K; ++q) {
        const double dth = theta[q] - theta[k];
        const cd rot = a2n * cd(std::cos(dth), std::sin(dth));
        const auto& kt = kern[k * K + q];
        for (int i = 0; i < ns; ++i)
          for (int j = 0; j < ns; ++j) {
            const int d = (q + j * K) - (k + i * K);
            gram(k * ns + i, q * ns + j) = base(k * ns + i, q * ns + j) * rot * kt[d + N - 1];
          }
      }
    const CVector d = gram.ldlt().solve(z);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < ns; ++i)
        words[k][static_cast<std::size_t>(b) * ns + i] = psk16_demodulate(d(k * ns + i));
  }
  return words;
}

long long count_bit_errors(const std::vector<std::vector<unsigned>>& a,
                           const std::vector<std::vector<unsigned>>& b) {
  if (a.size() != b.size()) throw DimensionError("word sets differ in user count");
  long long errors = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].size() != b[k].size()) throw DimensionError("word sets differ in length");
    for (std::size_t i = 0; i < a[k].size(); ++i) errors += std::popcount(a[k][i] ^ b[k][i]);
  }
  return errors;
}

}  // namespace rissim
