#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ricci2d {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Query outside the region covered by the grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Degenerate input (zero datum, constant profile, rank deficiency).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

// Newton did not converge; the caller is expected to retry with a smaller dt.
class StepRejected : public Error {
 public:
  using Error::Error;
};

class StiffnessFailure : public Error {
 public:
  StiffnessFailure(const std::string& msg, std::string checkpoint)
      : Error(msg), checkpoint_(std::move(checkpoint)) {}
  const std::string& checkpoint_path() const { return checkpoint_; }

 private:
  std::string checkpoint_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ricci2d
