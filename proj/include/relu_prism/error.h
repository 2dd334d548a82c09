#pragma once

#include <stdexcept>
#include <string>

namespace relu_prism {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, empty inputs, bad tolerances.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// The operation is defined only for a scalar-output network.
class UnsupportedShapeError : public Error {
 public:
  using Error::Error;
};

// A file did not match its expected layout (missing column, bad row, bad JSON).
class SchemaError : public Error {
 public:
  using Error::Error;
};

class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(int epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace relu_prism
