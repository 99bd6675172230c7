#pragma once

#include <stdexcept>
#include <string>

namespace qcff {

/// Base of every error raised by the library. The CLI maps the three
/// families below onto process exit codes.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Data / domain problems (CLI exit code 2).
class DataError : public Error {
  public:
    using Error::Error;
};

// Numeric failures (CLI exit code 3).
class NumericError : public Error {
  public:
    using Error::Error;
};

// Misconfiguration (CLI exit code 1).
class ConfigError : public Error {
  public:
    using Error::Error;
};

class DomainError : public DataError {
  public:
    using DataError::DataError;
};
class ShapeError : public DataError {
  public:
    using DataError::DataError;
};
class IndexError : public DataError {
  public:
    using DataError::DataError;
};
class MissingTruthError : public DataError {
  public:
    using DataError::DataError;
};
class InsufficientReplicasError : public DataError {
  public:
    using DataError::DataError;
};
class DegenerateDataError : public DataError {
  public:
    using DataError::DataError;
};
class EmptyEnsembleError : public DataError {
  public:
    using DataError::DataError;
};
class IoError : public DataError {
  public:
    using DataError::DataError;
};
class SchemaError : public DataError {
  public:
    using DataError::DataError;
};

class SingularityError : public NumericError {
  public:
    using NumericError::NumericError;
};
class NonFiniteError : public NumericError {
  public:
    using NumericError::NumericError;
};
class DivergenceError : public NumericError {
  public:
    using NumericError::NumericError;
};
class OverflowError : public NumericError {
  public:
    using NumericError::NumericError;
};
class ConvergenceError : public NumericError {
  public:
    using NumericError::NumericError;
};
class ZeroSigmaError : public NumericError {
  public:
    using NumericError::NumericError;
};
class DivisionByZeroError : public NumericError {
  public:
    using NumericError::NumericError;
};

} // namespace qcff
