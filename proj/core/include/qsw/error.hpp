#pragma once

#include <stdexcept>
#include <string>

namespace qsw {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (bad CSV, non-positive prices, short history).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Parameters outside their documented domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a finite, valid result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace qsw
