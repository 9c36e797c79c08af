#pragma once

#include <stdexcept>
#include <string>

namespace synthtext {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data could not be read or decoded.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// A precondition or configuration constraint was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace synthtext
