#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace rissim {

using cd = std::complex<double>;

/// Dense row-major array with the last axis contiguous.
template <std::size_t Rank>
class Tensor {
 public:
  Tensor() { dims_.fill(0); }
  explicit Tensor(const std::array<std::size_t, Rank>& dims)
      : dims_(dims), data_(count(dims), cd{0.0, 0.0}) {}

  const std::array<std::size_t, Rank>& dims() const { return dims_; }
  std::size_t dim(std::size_t axis) const { return dims_[axis]; }
  std::size_t size() const { return data_.size(); }

  template <typename... I>
  cd& operator()(I... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }
  template <typename... I>
  const cd& operator()(I... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  /// Contiguous last-axis run at the given leading indices.
  template <typename... I>
  std::span<cd> row(I... idx) {
    return {data_.data() + lead_offset({static_cast<std::size_t>(idx)...}), dims_[Rank - 1]};
  }
  template <typename... I>
  std::span<const cd> row(I... idx) const {
    return {data_.data() + lead_offset({static_cast<std::size_t>(idx)...}), dims_[Rank - 1]};
  }

  std::vector<cd>& data() { return data_; }
  const std::vector<cd>& data() const { return data_; }

  bool operator==(const Tensor&) const = default;

 private:
  static std::size_t count(const std::array<std::size_t, Rank>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>());
  }
  std::size_t offset(const std::array<std::size_t, Rank>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < Rank; ++a) off = off * dims_[a] + idx[a];
    return off;
  }
  std::size_t lead_offset(const std::array<std::size_t, Rank - 1>& idx) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a + 1 < Rank; ++a) off = off * dims_[a] + idx[a];
    return off * dims_[Rank - 1];
  }

  std::array<std::size_t, Rank> dims_;
  std::vector<cd> data_;
};

using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;

}  // namespace rissim
