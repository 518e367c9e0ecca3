#pragma once

#include <stdexcept>
#include <string>

namespace turnkan {

// Invalid model, search-space or experiment configuration. The message names the field.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Tensor shapes do not conform to an op's signature.
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Malformed or inconsistent input data (CSV rows, trial sets, splits).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem failures: missing dataset, unwritable output directory.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite loss or gradient, failed integration.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A statistical test rejected its input (too few pairs, degenerate differences).
struct StatsError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace turnkan
