#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace rissim {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Combine a seed with a list of keys into a new independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const { return seed_; }
  RandomStream child(std::initializer_list<std::uint64_t> keys) const {
    return RandomStream(derive_seed(seed_, keys));
  }

  double uniform(double lo, double hi);
  double normal(double mean, double stddev);
  /// Circularly symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance);
  std::uint64_t bits();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace rissim
