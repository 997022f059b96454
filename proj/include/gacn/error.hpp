#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gacn {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based; 0 when the error is not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : Error(path + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition (shape mismatch, negative weight, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A NaN or Inf appeared in the output of the named operation.
class NumericError : public Error {
 public:
  explicit NumericError(std::string op)
      : Error("non-finite value produced by '" + op + "'"), op_(std::move(op)) {}
  const std::string& op() const noexcept { return op_; }

 private:
  std::string op_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

}  // namespace gacn
