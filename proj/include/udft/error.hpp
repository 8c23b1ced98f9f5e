#pragma once

#include <stdexcept>
#include <string>

namespace udft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad magic, unsupported version or malformed text.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Payload shorter or longer than its header declares.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data invariant (NaN features, label out of range, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace udft
