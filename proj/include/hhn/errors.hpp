#pragma once

#include <stdexcept>
#include <string>

namespace hhn {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file does not follow the expected on-disk layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Open/read/write failure on a path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad or unknown configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A function under evaluation produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Every entry of a softmax row was masked out.
class DegenerateRowError : public Error {
 public:
  DegenerateRowError(std::size_t row)
      : Error("softmax row " + std::to_string(row) + " is fully masked"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// Training diverged (loss or gradient became non-finite).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hhn
