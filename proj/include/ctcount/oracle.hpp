#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ctcount/exec.hpp"
#include "ctcount/margins.hpp"
#include "ctcount/typical.hpp"

namespace ctcount {

using BigInt = boost::multiprecision::cpp_int;

struct ExactCount {
  enum class Method { Dp, Brute };
  BigInt value;
  std::int64_t states_explored = 0;
  Method method = Method::Dp;
  bool used_bigint = false;  // true when the 128-bit path overflowed
};

/// Sweep folds the last two columns in closed form. Split also closes the
/// two before them and sums over how the row remainders divide between the
/// pairs. Needs at least four columns.
enum class DpPlan { Sweep, Split };

struct ExactConfig {
  double state_budget = 2e8;
  /// Count on whichever of (R, C) and (C, R) has the smaller estimated
  /// frontier. Off means the states are always remaining row sums.
  bool auto_orient = true;
  /// Start directly on arbitrary precision, skipping the 128-bit attempt.
  bool force_bigint = false;
  /// Overrides the cheaper plan by estimate; Split is ignored below four columns.
  std::optional<DpPlan> plan;
};

/// Number of m x n non-negative integer tables with the given margins.
///
/// Column-by-column dynamic program over remaining row sums. A column is
/// applied as m single-row passes that carry the column's unplaced budget;
/// each pass is a suffix sum along lines where (row remainder - budget) is
/// constant, so it is linear in the live states. Columns go in ascending
/// order; the largest column is forced and the second largest is folded in
/// by counting bounded compositions per state. Throws BudgetExceeded before
/// allocating if the estimated frontier exceeds cfg.state_budget.
ExactCount exact_count(const Margins& margins, const ExactConfig& cfg = {});

/// Estimated work of the cheaper plan with states over rows.
double dp_state_estimate(const Margins& margins);

/// Enumerates every table row by row. Requires prod (r_j + 1) <= max_product
/// and at most max_leaves row-wise compositions to walk.
ExactCount brute_enumerate(const Margins& margins, double max_product = 1e7, double max_leaves = 1e9);

/// #{x in Z^len : 0 <= x_i <= bounds_i, sum x = total}.
BigInt bounded_compositions(std::int64_t total, const std::vector<std::int64_t>& bounds);

struct QuadratureResult {
  double real_part = 0;  // integral of F over the torus with t_n = 0
  double imag_part = 0;
  /// Free axes s_1..s_m, t_1..t_{n-1}; when transposed, s_m is pinned
  /// instead and the axes are t_1..t_n, s_1..s_{m-1}.
  std::vector<int> grid_points_per_axis;
  bool transposed = false;
  double estimate = 0;  // e^{g(Z)} real_part / (2 pi)^{m+n-1}
};

struct QuadratureConfig {
  /// Uniform points per axis; 0 picks each axis so the aliasing error is
  /// provably below alias_tol relative to the count.
  int grid = 0;
  double alias_tol = 1e-13;
  int max_dim = 5;
  /// Limit on integrand factor evaluations, see quadrature_work.
  double max_work = 4e9;
  Exec exec = Exec::Parallel;
};

/// Periodic trapezoid rule for the characteristic-function integral of the
/// count on the tensor grid, pinning t_n or s_m, whichever needs less work.
/// Throws DimensionTooLarge when m + n - 1 >
/// cfg.max_dim, InvalidArgument when a grid does not exceed N and
/// BudgetExceeded when the work exceeds cfg.max_work.
QuadratureResult integral_count(const TypicalSolution& solution, const Margins& margins,
                                const QuadratureConfig& cfg = {});

/// Integrand factor evaluations for a grid: prod_t G_t * sum_s G_s * n.
double quadrature_work(const std::vector<int>& grid, int m, int n);

/// Per-axis grid sizes integral_count uses when cfg.grid == 0.
std::vector<int> auto_quadrature_grid(const TypicalSolution& solution, const Margins& margins,
                                      double alias_tol = 1e-13);

struct GeometricMcResult {
  double estimate = 0;
  double std_error = 0;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
};

/// Draws independent geometric entries with means zeta_jk and counts the
/// samples that hit the margins exactly: count = e^{g(Z)} P(hit). Only
/// useful when the hit probability is not tiny; zero hits gives estimate 0.
GeometricMcResult geometric_mc_count(const TypicalSolution& solution, const Margins& margins,
                                     std::int64_t samples, std::uint64_t seed);

std::string exact_to_json(const ExactCount& count);

}  // namespace ctcount
