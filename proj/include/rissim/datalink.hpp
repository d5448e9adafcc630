#pragma once

#include <cstdint>
#include <vector>

#include "rissim/airlink.hpp"
#include "rissim/core.hpp"

namespace rissim {

constexpr int kPskOrder = 16;
constexpr int kBitsPerSymbol = 4;

/// Gray-coded 16-PSK: 4-bit word -> unit-modulus symbol.
cd psk16_modulate(unsigned word);
/// Nearest constellation point, returned as its 4-bit word.
unsigned psk16_demodulate(cd symbol);

struct DataBurst {
  Tensor3 tx;                          // [k][b][u]
  std::vector<std::vector<unsigned>> words;  // [k][b * Ns + i]
  int subcarriers_per_user = 0;
};

/// K users on interleaved subcarriers, one 16-PSK symbol per owned subcarrier and block.
DataBurst build_data_burst(int users, int n, int blocks, double power, RandomStream& rng);

/// Receiver-side knowledge of one arm.
struct ReceiverState {
  std::vector<double> eps;  // CFO per user
  Tensor3 cfr;              // effective CFR H[k][m][n] (unitary convention)
  double amplitude = 1.0;
};

/// Effective CFR sum_r h[k][m][r][n] phi_r.
Tensor3 effective_cfr(const Tensor4& h, const CVector& phi);

/// Joint zero-forcing across the CFO-shifted interleaved users with MRC over antennas.
std::vector<std::vector<unsigned>> detect_burst(const ReceivedFrame& frame,
                                                const ReceiverState& state, int users);

/// Bit errors between two word sets.
long long count_bit_errors(const std::vector<std::vector<unsigned>>& a,
                           const std::vector<std::vector<unsigned>>& b);

}  // namespace rissim
