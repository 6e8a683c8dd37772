#pragma once

#include <stdexcept>
#include <string>

namespace snn {

// Base type for everything this library throws on purpose. Catching
// snn::Error separates contract violations from genuine std failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or size mismatch between tensors / parameter blocks.
struct DimensionError : Error {
  using Error::Error;
};

// NaN or Inf where a finite value is required.
struct NumericError : Error {
  using Error::Error;
};

// Invalid probability vector (negative mass, sum far from 1, empty).
struct DistributionError : Error {
  using Error::Error;
};

// Bad user-supplied configuration: unknown keys, out-of-range values,
// inconsistent cross-field combinations.
struct ConfigError : Error {
  using Error::Error;
};

// Dataset-level problems: label out of range, empty dataset, shape not
// matching metadata.
struct DataError : Error {
  using Error::Error;
};

// On-disk dataset failed checksum or structural validation.
struct CorruptDatasetError : DataError {
  using DataError::DataError;
};

// An operation was handed state produced under an incompatible mode,
// e.g. a temporal-gradient backward pass over a memoryless trace.
struct ContractError : Error {
  using Error::Error;
};

// An analytical query is missing a field it needs (energy formulas).
struct QueryError : Error {
  using Error::Error;
};

// Filesystem read/write failure.
struct IoError : Error {
  using Error::Error;
};

// Training diverged or produced non-finite gradients/loss.
struct TrainingError : Error {
  using Error::Error;
};

// Numerical cross-check (finite differences, closed forms) failed.
struct OracleError : Error {
  using Error::Error;
};

}  // namespace snn
