#pragma once

#include <stdexcept>
#include <string>

namespace pathattr {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments or malformed caller input. CLI exit code 2.
class InputError : public Error {
  using Error::Error;
};

// File access or file content problems. CLI exit code 3.
class IoError : public Error {
  using Error::Error;
};

// Model spec file is not valid JSON or is missing required fields.
class SpecParseError : public IoError {
  using IoError::IoError;
};

// Adjacent layers in a model spec do not compose.
class DimensionMismatchError : public IoError {
  using IoError::IoError;
};

// Activation name outside {identity, relu, softplus}.
class UnknownActivationError : public IoError {
  using IoError::IoError;
};

// Non-finite value produced or consumed mid-computation. CLI exit code 4.
class NumericError : public Error {
  using Error::Error;
};

// The Guided IG inner loop failed to reduce the remaining L1 distance.
// Signals a broken quantile or tie rule, not bad user input.
class ProgressError : public NumericError {
  using NumericError::NumericError;
};

// ROC mask with no positives or no negatives.
class DegenerateMaskError : public InputError {
  using InputError::InputError;
};

}  // namespace pathattr
