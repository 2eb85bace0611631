#pragma once

#include <stdexcept>
#include <string>

namespace skewlie {

// Base of every library exception. The CLI maps the two families below onto
// its exit codes: configuration-type errors and numeric-type errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Operand sizes or descriptors do not match.
class DimensionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class RegistryError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnsupportedGroupError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// A documented precondition of an operation was violated by the caller.
class PreconditionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// The caller asked for a reduction that is only valid under a hypothesis the
// inputs do not satisfy (for instance a non-skew connection function).
class ContractViolation : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Group logarithm requested outside the injectivity radius; refine the grid.
class BranchError : public NumericError {
 public:
  using NumericError::NumericError;
};

class RepresentationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class TangencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Projection target lies in the wrong connected component (det < 0 etc).
class ComponentError : public NumericError {
 public:
  using NumericError::NumericError;
};

class FactorizationError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Finite-difference step left the chart of the group logarithm.
class StepError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Reading or writing a file failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace skewlie
