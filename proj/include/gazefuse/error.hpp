#pragma once

#include <stdexcept>
#include <string>

namespace gazefuse {

/// Base of every error raised by the library. Catch this to handle any
/// gazefuse failure; catch a subclass to react to one category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible tensor extents.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A configuration value violates its invariant.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an API precondition (non-scalar loss, non-binary target, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced where finite values were required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or version-incompatible file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A keyed record does not exist.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Invalid input data (degenerate boxes, empty views, bad CSV rows).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Audio alignment could not be established reliably; needs manual review.
class LowConfidenceError : public Error {
 public:
  using Error::Error;
};

/// Test-set balancing impossible (a class is absent).
class BalancingError : public Error {
 public:
  using Error::Error;
};

/// Metric undefined for the given input (e.g. AUC with one class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace gazefuse
