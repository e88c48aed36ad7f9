#pragma once

#include <stdexcept>
#include <string>

namespace cutdepth {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A region does not fit inside the image it targets.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// Two images that must share W x H do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A hyperparameter or configuration value is outside its legal range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The input carries no usable information (e.g. no valid depth pixel).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// A value is outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation was requested over zero valid pixels.
class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cutdepth
