#include "ctcount/typical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "ctcount/errors.hpp"

namespace ctcount {

double entropy_term(double x) {
  if (x == 0) return 0.0;
  // (x+1) ln(x+1) - x ln x = ln(1+x) + x ln(1 + 1/x)
  return std::log1p(x) + x * std::log1p(1.0 / x);
}

double entropy_g(const Matrix& X) {
  double g = 0;
  for (Eigen::Index k = 0; k < X.cols(); ++k)
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      const double x = X(j, k);
      if (!(x >= 0)) throw Error(ErrorKind::NegativeEntry, "entropy_g needs non-negative entries");
      g += entropy_term(x);
    }
  return g;
}

std::pair<double, double> residuals(const Matrix& X, const Margins& margins) {
  if (X.rows() != margins.m() || X.cols() != margins.n())
    throw Error(ErrorKind::ShapeMismatch, "matrix shape does not match margins");
  const Vector row_sums = X.rowwise().sum();
  const Vector col_sums = X.colwise().sum().transpose();
  double row_res = 0, col_res = 0;
  for (int j = 0; j < margins.m(); ++j) {
    const double r = static_cast<double>(margins.rows()[j]);
    row_res = std::max(row_res, std::abs(row_sums[j] - r) / r);
  }
  for (int k = 0; k < margins.n(); ++k) {
    const double c = static_cast<double>(margins.cols()[k]);
    col_res = std::max(col_res, std::abs(col_sums[k] - c) / c);
  }
  return {row_res, col_res};
}

double row_mass(double phi, const Vector& psi) {
  double mass = 0;
  for (Eigen::Index k = 0; k < psi.size(); ++k) mass += 1.0 / std::expm1(phi + psi[k]);
  return mass;
}

namespace {

// Solves sum_k 1/expm1(phi + other_k) = target for phi.
//
// With y = phi + min(other) the left side is a bijection from (0, inf) onto
// (0, inf), bracketed by 1/expm1(y) <= mass <= len/expm1(y). Newton runs on
// ln(mass) against ln(y), which is close to linear at both ends; any step that
// leaves the bracket is replaced by bisection in ln(y).
double solve_potential(double target, const Vector& other) {
  const double shift = other.minCoeff();
  const Eigen::Index len = other.size();
  Vector gap = other.array() - shift;

  double lo = std::log(std::log1p(1.0 / target));                       // mass >= target
  double hi = std::log(std::log1p(static_cast<double>(len) / target));   // mass <= target
  if (hi <= lo) return std::exp(lo) - shift;  // single term

  const double log_target = std::log(target);
  double u = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double y = std::exp(u);
    double mass = 0, slope = 0;
    for (Eigen::Index k = 0; k < len; ++k) {
      const double z = 1.0 / std::expm1(y + gap[k]);
      mass += z;
      slope += z * (z + 1.0);
    }
    const double resid = std::log(mass) - log_target;
    if (resid > 0) lo = u; else hi = u;
    if (std::abs(resid) <= 4 * std::numeric_limits<double>::epsilon()) break;
    // d ln(mass) / d ln(y) = -y * slope / mass
    const double deriv = -y * slope / mass;
    double next = u - resid / deriv;
    if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 2 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(u))) {
      u = next;
      break;
    }
    u = next;
  }
  return std::exp(u) - shift;
}

void fill_zeta(const Vector& phi, const Vector& psi, Matrix& zeta) {
  for (Eigen::Index k = 0; k < psi.size(); ++k)
    for (Eigen::Index j = 0; j < phi.size(); ++j) zeta(j, k) = 1.0 / std::expm1(phi[j] + psi[k]);
}

}  // namespace

TypicalSolution solve_typical(const Margins& margins, const TypicalConfig& cfg) {
  if (!(cfg.tol > 0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  if (cfg.max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be positive");

  const int m = margins.m();
  const int n = margins.n();
  Vector phi(m), psi(n);
  switch (cfg.init) {
    case DualInit::RowShare:
      for (int j = 0; j < m; ++j)
        phi[j] = std::log1p(static_cast<double>(n) / static_cast<double>(margins.rows()[j]));
      psi.setZero();
      break;
    case DualInit::Flat: {
      const double half =
          0.5 * std::log1p(static_cast<double>(m) * n / static_cast<double>(margins.total()));
      phi.setConstant(half);
      psi.setConstant(half);
      break;
    }
  }

  TypicalSolution sol;
  Matrix& zeta = sol.Z.zeta;
  zeta.resize(m, n);
  double residual = std::numeric_limits<double>::infinity();
  std::int64_t it = 0;
  while (it < cfg.max_iter) {
    ++it;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < m; ++j)
      phi[j] = solve_potential(static_cast<double>(margins.rows()[j]), psi);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k)
      psi[k] = solve_potential(static_cast<double>(margins.cols()[k]), phi);

    fill_zeta(phi, psi, zeta);
    const auto [rr, cr] = residuals(zeta, margins);
    sol.Z.row_residual = rr;
    sol.Z.col_residual = cr;
    residual = std::max(rr, cr);
    if (residual <= cfg.tol) break;
  }
  if (residual > cfg.tol) throw NoConvergence(it, residual);

  const double gauge = psi[n - 1];
  psi.array() -= gauge;
  phi.array() += gauge;
  psi[n - 1] = 0.0;

  sol.duals.row_potential = std::move(phi);
  sol.duals.col_potential = std::move(psi);
  sol.g_of_Z = entropy_g(zeta);
  sol.iterations = it;
  return sol;
}

std::string typical_to_json(const TypicalSolution& sol) {
  nlohmann::json j;
  j["schema"] = 1;
  const Matrix& z = sol.Z.zeta;
  j["m"] = z.rows();
  j["n"] = z.cols();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(z.size()));
  for (Eigen::Index r = 0; r < z.rows(); ++r)
    for (Eigen::Index c = 0; c < z.cols(); ++c) flat.push_back(z(r, c));
  j["zeta"] = flat;
  j["row_potential"] = std::vector<double>(sol.duals.row_potential.begin(), sol.duals.row_potential.end());
  j["col_potential"] = std::vector<double>(sol.duals.col_potential.begin(), sol.duals.col_potential.end());
  j["row_residual"] = sol.Z.row_residual;
  j["col_residual"] = sol.Z.col_residual;
  j["g_of_Z"] = sol.g_of_Z;
  j["iterations"] = sol.iterations;
  return j.dump();
}

}  // namespace ctcount
