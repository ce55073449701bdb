#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctcount {

/// Failure categories. The CLI maps input-side kinds to exit code 1 and
/// computational kinds to exit code 2.
enum class ErrorKind {
  Io,
  Parse,
  SumMismatch,
  NonPositive,
  Infeasible,
  NegativeEntry,
  ShapeMismatch,
  IndexOutOfRange,
  DimensionTooLarge,
  InvalidArgument,
  NoConvergence,
  NotPositiveDefinite,
  BudgetExceeded,
};

const char* to_string(ErrorKind kind);

/// True for errors caused by the inputs rather than by a computation.
bool is_input_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::int64_t iterations, double residual);
  std::int64_t iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  std::int64_t iterations_;
  double residual_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(double states_estimate, const std::string& what);
  double states_estimate() const noexcept { return states_estimate_; }

 private:
  double states_estimate_;
};

}  // namespace ctcount
