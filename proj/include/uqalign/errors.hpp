#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace uqalign {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or record breaks a documented invariant. Carries the 1-based input
// line when the error came from a parser.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
      : Error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}
  std::optional<std::size_t> line() const { return line_; }

 private:
  std::optional<std::size_t> line_;
};

// Probability mass outside the accepted window around 1.
class MassError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A value outside its admissible range (probabilities, proportions, counts).
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Missing, extra or mistyped field in serialized input.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The quantity is undefined for this input (zero mass, zero variance).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Mismatched or insufficient vector lengths.
class LengthError : public Error {
 public:
  using Error::Error;
};

class EmptyError : public Error {
 public:
  using Error::Error;
};

// The dump does not list enough tokens to resolve a top-k / top-p subset.
class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string& what, std::string parameter = {})
      : Error(what), parameter_(std::move(parameter)) {}
  // "k=100" or "p=0.95"; empty when raised below the measure layer.
  const std::string& parameter() const { return parameter_; }

 private:
  std::string parameter_;
};

class EmptyPartitionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace uqalign
