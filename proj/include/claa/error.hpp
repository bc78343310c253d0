#pragma once

#include <stdexcept>
#include <string>

namespace claa {

// Base for every domain failure the toolkit reports. The CLI maps these to
// exit code 1; the service maps subclasses onto HTTP status codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller input: malformed rows, unknown labels, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A registry encoder was requested but no backend can serve it.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// Loss or gradient became NaN/Inf during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace claa
