#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bodynet {

// Base of every error the library throws. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite numbers, zero vectors, out-of-range arguments.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Invalid scenario, unknown preset, roster bounds.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed CSV row. `line` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Data that parses but breaks a recording or calibration invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Input-dependent analysis failures (no temporal overlap, zero variance, ...).
class AnalysisError : public Error {
 public:
  using Error::Error;
};

}  // namespace bodynet
