#pragma once

#include <stdexcept>
#include <string>

namespace csam {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid hyperparameter or basis configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or unusable input data (bad labels, non-finite values, bad CSV).
struct DataError : Error {
  using Error::Error;
};

// Shape mismatch between related objects (rows, columns, block counts).
struct DimensionError : Error {
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
  using Error::Error;
};

// Filesystem failures (unreadable or unwritable paths).
struct IoError : Error {
  using Error::Error;
};

// Metric requested on inputs where it is undefined (e.g. average precision
// with zero positive examples).
struct UndefinedMetricError : Error {
  using Error::Error;
};

}  // namespace csam
