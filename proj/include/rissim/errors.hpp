#pragma once

#include <stdexcept>
#include <string>

namespace rissim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or array dimensions that cannot be used together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or missing/unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A linear system in an estimator was singular or rank deficient.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace rissim
