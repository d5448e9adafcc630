#include "rissim/random.hpp"

#include <cmath>

namespace rissim {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t k : keys) h = mix64(h ^ mix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

double RandomStream::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(engine_);
}

double RandomStream::normal(double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(engine_);
}

std::complex<double> RandomStream::complex_normal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  std::normal_distribution<double> d(0.0, 1.0);
  const double re = d(engine_);
  const double im = d(engine_);
  return {s * re, s * im};
}

std::uint64_t RandomStream::bits() { return engine_(); }

}  // namespace rissim
