#pragma once

#include "ctcount/margins.hpp"
#include "ctcount/typical.hpp"

namespace ctcount {

/// Which coordinate of (s_1..s_m; t_1..t_n) is pinned to zero.
struct Hyperplane {
  enum class Side { Row, Col };
  Side side = Side::Col;
  int index = -1;  // 0-based; -1 means "last column" (t_n)

  static Hyperplane drop_t(int k) { return {Side::Col, k}; }
  static Hyperplane drop_s(int j) { return {Side::Row, j}; }
};

/// Gaussian model of the row/column sums on a coordinate hyperplane.
///
/// Free coordinates are ordered s_1..s_m then t_1..t_n with the pinned one
/// removed. The form restricted to the hyperplane is q(x) = <x, Q x> / 2 and
/// Sigma = Q^{-1} is the covariance of the density proportional to exp(-q).
/// Determinants are only ever stored as natural logs.
struct QuadraticModel {
  int m = 0;
  int n = 0;
  Hyperplane hyperplane;
  Matrix Q;
  Matrix Sigma;
  Matrix cholesky_lower;  // Q = L L^T
  double logdet_Q = 0;
  double logdet_qL = 0;   // (1 - m - n) ln 2 + logdet_Q
  double logdet_qH = 0;   // ln(m + n) + logdet_qL

  /// Position of s_j in the reduced coordinates, or -1 if pinned.
  int s_index(int j) const;
  /// Position of t_k in the reduced coordinates, or -1 if pinned.
  int t_index(int k) const;
  int dim() const { return m + n - 1; }
};

/// Throws NotPositiveDefinite when the Cholesky factorization fails.
QuadraticModel build_quadratic(const Matrix& zeta, const Margins& margins,
                               Hyperplane hyperplane = {});

/// The full (m+n) x (m+n) matrix of q itself (not 2q), null vector (1..1; -1..-1).
Matrix full_form(const Matrix& zeta);

/// Cov(s_j1 + t_k1, s_j2 + t_k2) under the model. Throws IndexOutOfRange.
double pair_sum_covariance(const QuadraticModel& model, int j1, int k1, int j2, int k2);

/// e^{g(Z)} sqrt(m+n) / ((4 pi)^{(m+n-1)/2} sqrt(det q|H)), in natural log.
double gaussian_log_count(double g_of_Z, const QuadraticModel& model, int m, int n);

struct CovarianceDiagnostics {
  Vector a;  // a_j = sum_k (zeta_jk^2 + zeta_jk)
  Vector b;  // b_k = sum_j (zeta_jk^2 + zeta_jk)
  double delta_bound = 0;
};

/// delta is the smoothness constant the bound is evaluated at and tau the
/// common scale of zeta, Delta = 12 / (delta^{15/2} (tau^2 + tau) m n).
CovarianceDiagnostics covariance_diagnostics(const Matrix& zeta, double delta, double tau);

/// Row-major JSON dump of Q and Sigma for debugging.
std::string quadratic_to_json(const QuadraticModel& model);

}  // namespace ctcount
