#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsc {

class GscError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function, or a point outside
// dom f. row is the first violating row for model oracles, -1 otherwise.
class DomainError : public GscError {
 public:
  explicit DomainError(const std::string& what, long row = -1)
      : GscError(what), row_(row) {}
  long row() const { return row_; }

 private:
  long row_;
};

class InvalidArgument : public GscError {
 public:
  using GscError::GscError;
};

class NotPositiveDefinite : public GscError {
 public:
  using GscError::GscError;
};

// Iterative method ran out of budget. residual is the last residual seen.
class ConvergenceError : public GscError {
 public:
  ConvergenceError(const std::string& what, double residual)
      : GscError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class InexactSubproblem : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

class UnboundedError : public GscError {
 public:
  using GscError::GscError;
};

class ParseError : public GscError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : GscError(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public GscError {
 public:
  using GscError::GscError;
};

}  // namespace gsc
