#pragma once

#include <stdexcept>
#include <string>

namespace ssg {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON/CSV syntax, missing or mistyped fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that breaks a domain invariant. The message names the
// violated invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Bad experiment / CLI configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ssg
