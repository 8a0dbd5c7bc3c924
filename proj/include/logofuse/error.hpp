#pragma once

#include <stdexcept>
#include <string>

namespace logofuse {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed textual input (codes, manifests, CSV, weight strings).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a contract (shape mismatch, missing block...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Filesystem or decoding failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace logofuse
