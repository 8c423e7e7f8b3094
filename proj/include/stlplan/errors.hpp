#pragma once

#include <stdexcept>
#include <string>

namespace stlplan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// A time value does not fall on the sampling (or knot) grid.
class Misalignment : public Error {
 public:
  using Error::Error;
};

/// A temporal operator's shifted window reaches past the end of the trace.
class HorizonOverflow : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid input document; the message carries the field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace stlplan
