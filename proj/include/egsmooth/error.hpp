#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace egsmooth {

/// Base for all recoverable data errors raised by the library. The CLI maps
/// these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed record. `line()` is 1-based, or 0 when the error is not tied to
/// a line of a text file.
class ParseError : public DataError {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : DataError(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public DataError {
 public:
  using DataError::DataError;
};

/// Premise and hypothesis (or an index and a query) disagree on type signature.
class SignatureMismatch : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace egsmooth
