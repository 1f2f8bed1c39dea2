#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace imtm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised by the Cholesky factorization when a leading minor is not positive.
class DecompositionError : public Error {
 public:
  DecompositionError(std::size_t pivot, double value);
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Zero-length ray direction, off-ray density query, zero lambda denominator.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

class NumericalOverflowError : public Error {
 public:
  using Error::Error;
};

/// Configuration validation failure; carries every violated constraint.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  explicit ConfigError(const std::string& violation)
      : ConfigError(std::vector<std::string>{violation}) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

}  // namespace imtm
