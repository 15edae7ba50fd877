#pragma once

#include <stdexcept>
#include <string>

namespace nbrgds {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid distribution or operation parameters (non-finite, out of support).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent run configuration (schedules, masks, config files).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable input data.
class DataFormatError : public Error {
 public:
  using Error::Error;
};

/// Numerical degeneracy discovered while sampling or generating.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A model-structure invariant was violated (e.g. a Dirichlet column with no
/// positive concentration).
class StructuralError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nbrgds
