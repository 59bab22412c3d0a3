#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spbvem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or degenerate geometry (element id is part of the message when known).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Input parameters violating an operation's preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear or linear solver failure; carries the residual trace up to the failure.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace spbvem
