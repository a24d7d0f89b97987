#pragma once

#include <stdexcept>
#include <string>

namespace ddmr {

/// Inputs whose shapes do not agree with each other or with a model.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be inverted (or factored) is singular or too badly conditioned.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values outside the documented domain (negative sigma, unstable reference model, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Oracle-only data (true noise, clean states, true plant) was required but absent.
class MissingOracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed files: CSV, JSON, SDPA.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Files that cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ddmr
