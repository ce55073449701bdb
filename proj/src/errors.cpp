#include "ctcount/errors.hpp"

#include <sstream>

namespace ctcount {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::SumMismatch: return "sum_mismatch";
    case ErrorKind::NonPositive: return "non_positive";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::NegativeEntry: return "negative_entry";
    case ErrorKind::ShapeMismatch: return "shape_mismatch";
    case ErrorKind::IndexOutOfRange: return "index_out_of_range";
    case ErrorKind::DimensionTooLarge: return "dimension_too_large";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::NoConvergence: return "no_convergence";
    case ErrorKind::NotPositiveDefinite: return "not_positive_definite";
    case ErrorKind::BudgetExceeded: return "budget_exceeded";
  }
  return "unknown";
}

bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::NotPositiveDefinite:
    case ErrorKind::BudgetExceeded:
      return false;
    default:
      return true;
  }
}

namespace {

std::string no_convergence_message(std::int64_t iterations, double residual) {
  std::ostringstream os;
  os << "typical matrix solver did not converge after " << iterations
     << " sweeps (residual " << residual << ")";
  return os.str();
}

}  // namespace

NoConvergence::NoConvergence(std::int64_t iterations, double residual)
    : Error(ErrorKind::NoConvergence, no_convergence_message(iterations, residual)),
      iterations_(iterations),
      residual_(residual) {}

BudgetExceeded::BudgetExceeded(double states_estimate, const std::string& what)
    : Error(ErrorKind::BudgetExceeded, what), states_estimate_(states_estimate) {}

}  // namespace ctcount
