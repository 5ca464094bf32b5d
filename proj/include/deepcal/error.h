#ifndef DEEPCAL_ERROR_H_
#define DEEPCAL_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepcal {

// Base of every error raised by the library. Each subclass maps to one
// failure category; the CLI translates them into exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside their admissible domain (e.g. alpha == 1, lambda <= 0).
class InvalidParams : public Error {
 public:
  using Error::Error;
};

// A simulated volatility left the domain of the log-Laplace transform.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, std::size_t path_index)
      : Error(what), path_index_(path_index) {}
  explicit DomainError(const std::string& what) : Error(what) {}

  std::size_t path_index() const { return path_index_; }

 private:
  std::size_t path_index_ = 0;
};

// Characteristic-function inversion produced an unusable density.
class InversionFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class MalformedFile : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

// Text input that could not be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Option chain with no usable quotes after filtering.
class EmptyChain : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or an unrecoverable numerical breakdown.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace deepcal

#endif  // DEEPCAL_ERROR_H_
