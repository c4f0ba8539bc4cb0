#pragma once

#include <stdexcept>
#include <string>

namespace pdbench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (CSV, frames, shapes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or model specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A model could not be estimated on the given data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// An output location could not be created or written.
class OutputError : public Error {
 public:
  using Error::Error;
};

}  // namespace pdbench
