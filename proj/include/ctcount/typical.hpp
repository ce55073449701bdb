#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "ctcount/margins.hpp"

namespace ctcount {

/// The maximizer Z of g over the transportation polytope, with the relative
/// margin residuals it was accepted at.
struct TypicalMatrix {
  Matrix zeta;
  double row_residual = 0;
  double col_residual = 0;
};

/// Lagrange multipliers of the entropy program, zeta_jk = 1/(exp(phi_j + psi_k) - 1).
/// Gauge: psi_n = 0.
struct DualPotentials {
  Vector row_potential;
  Vector col_potential;
};

struct TypicalSolution {
  TypicalMatrix Z;
  DualPotentials duals;
  double g_of_Z = 0;  // nats
  std::int64_t iterations = 0;
};

enum class DualInit {
  RowShare,  // phi_j = ln(1 + n / r_j), psi = 0: starts each row at r_j / n
  Flat,      // phi_j = ln(1 + m n / N) / 2 = psi_k: starts at the mean density
};

struct TypicalConfig {
  double tol = 1e-10;
  std::int64_t max_iter = 10000;
  DualInit init = DualInit::RowShare;
};

/// Alternating dual ascent. Each half-sweep solves m (then n) independent
/// monotone scalar equations by safeguarded Newton; those solves run in
/// parallel. Throws NoConvergence after max_iter sweeps.
TypicalSolution solve_typical(const Margins& margins, const TypicalConfig& cfg = {});

/// g(x) = (x+1) ln(x+1) - x ln x with g(0) = 0.
double entropy_term(double x);

/// Sum of entropy_term over all entries. Throws NegativeEntry.
double entropy_g(const Matrix& X);

/// (max_j |sum_k x_jk - r_j| / r_j, max_k |sum_j x_jk - c_k| / c_k).
/// Throws ShapeMismatch.
std::pair<double, double> residuals(const Matrix& X, const Margins& margins);

/// Sum of the entries in row j of zeta as a function of the row potential,
/// sum_k 1/(exp(phi + psi_k) - 1). Strictly decreasing on phi > -min psi.
double row_mass(double phi, const Vector& psi);

/// Row-major matrix, potentials and g(Z).
std::string typical_to_json(const TypicalSolution& sol);

}  // namespace ctcount
