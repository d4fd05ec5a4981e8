#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace supdtl {

// Base class for every error raised by the library. The CLI maps these to a
// nonzero exit status with the message as the diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent inputs (dimension mismatch, empty interval, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

// A correlation matrix with a materially negative eigenvalue.
class NotPositiveSemidefinite : public Error {
 public:
  using Error::Error;
};

// Enumeration or search exceeded a configured limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// The calibration bracket does not straddle the target.
class BracketError : public Error {
 public:
  using Error::Error;
};

// Configuration text that does not follow the documented schema.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// A parsed value that violates a field invariant; names the field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& msg)
      : Error(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace supdtl
