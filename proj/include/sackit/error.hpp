#pragma once

#include <stdexcept>
#include <string>

namespace sackit {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (stream rows, config files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " at line " + std::to_string(line)), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Well-formed input that violates a structural invariant.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Container header carries an unsupported version tag or bad magic.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure cannot produce a meaningful result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sackit
