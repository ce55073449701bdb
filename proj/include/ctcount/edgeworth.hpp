#pragma once

#include <complex>
#include <cstdint>
#include <string>

#include "ctcount/exec.hpp"
#include "ctcount/gaussian.hpp"
#include "ctcount/margins.hpp"
#include "ctcount/typical.hpp"

namespace ctcount {

/// Coefficient of (s_j + t_k)^3 in f: zeta (zeta+1) (2 zeta+1) / 6.
double cubic_coefficient(double zeta);
/// Coefficient of (s_j + t_k)^4 in h: zeta (zeta+1) (6 zeta^2 + 6 zeta + 1) / 24.
double quartic_coefficient(double zeta);

/// Covariance of the reduced coordinates embedded back into (m+n) x (m+n),
/// with a zero row and column at the pinned coordinate. Entry (x, y) is
/// Cov(x, y) for x, y in (s_1..s_m; t_1..t_n).
Matrix embedded_covariance(const QuadraticModel& model);

/// nu = E h = sum_jk quartic_coefficient * 3 * Var(s_j + t_k)^2.
double nu_term(const Matrix& zeta, const QuadraticModel& model);

/// mu = E f^2 by Wick's formula,
///   sum over pairs p, p' of c_p c_p' (9 Var_p Var_p' rho + 6 rho^3),
/// rho = Cov(w_p, w_p'). O(m^2 n^2).
double mu_term(const Matrix& zeta, const QuadraticModel& model, Exec exec = Exec::Parallel);

struct EdgeworthTerms {
  double mu = 0;
  double nu = 0;
  double log_factor = 0;  // -mu/2 + nu
};

EdgeworthTerms edgeworth_terms(const Matrix& zeta, const QuadraticModel& model);

struct CountEstimate {
  double log_count = 0;  // gaussian_log + edgeworth_log_factor
  double gaussian_log = 0;
  double edgeworth_log_factor = 0;
  double g_of_Z = 0;
  double logdet_qH = 0;
  double mu = 0;
  double nu = 0;
  std::int64_t iterations = 0;
};

struct EstimateConfig {
  TypicalConfig typical;
};

/// Typical matrix -> quadratic model on t_n = 0 -> Wick moments. Propagates
/// NoConvergence and NotPositiveDefinite.
CountEstimate estimate_count(const Margins& margins, const EstimateConfig& cfg = {});

/// Same pipeline on an already solved typical matrix.
CountEstimate estimate_from_solution(const TypicalSolution& sol, const Margins& margins);

struct MonteCarloMoments {
  double mu_hat = 0;
  double nu_hat = 0;
  double var_h_hat = 0;
  std::complex<double> char_fn_hat;  // E exp(i f)
  double mu_se = 0;
  double nu_se = 0;
  double var_h_se = 0;
  double char_fn_se = 0;  // of |E exp(i f)| componentwise, max of Re/Im errors
  std::int64_t samples = 0;
};

/// Samples the Gaussian with covariance Sigma and averages f^2, h, exp(i f).
/// Samples are drawn in fixed-size blocks with seeds derived from (seed,
/// block), so results do not depend on the thread count. Validation only.
MonteCarloMoments mc_expectations(const QuadraticModel& model, const Matrix& zeta,
                                  std::int64_t samples, std::uint64_t seed,
                                  Exec exec = Exec::Parallel);

/// "m.mmmmme+X" with 6 significant digits, round-half-even, from a natural log.
std::string decimal_from_log(double log_value);

std::string estimate_to_json(const CountEstimate& est);

}  // namespace ctcount
