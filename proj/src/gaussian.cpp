#include "ctcount/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

#include "ctcount/errors.hpp"

namespace ctcount {

namespace {

// Flat index of the pinned coordinate in (s_1..s_m; t_1..t_n).
int pinned_flat(const Hyperplane& h, int m, int n) {
  if (h.side == Hyperplane::Side::Col) {
    const int k = h.index < 0 ? n - 1 : h.index;
    if (k >= n) throw Error(ErrorKind::IndexOutOfRange, "pinned column out of range");
    return m + k;
  }
  if (h.index < 0 || h.index >= m) throw Error(ErrorKind::IndexOutOfRange, "pinned row out of range");
  return h.index;
}

int reduced_index(int flat, int pinned) {
  if (flat == pinned) return -1;
  return flat < pinned ? flat : flat - 1;
}

}  // namespace

int QuadraticModel::s_index(int j) const {
  return reduced_index(j, pinned_flat(hyperplane, m, n));
}

int QuadraticModel::t_index(int k) const {
  return reduced_index(m + k, pinned_flat(hyperplane, m, n));
}

Matrix full_form(const Matrix& zeta) {
  const Eigen::Index m = zeta.rows(), n = zeta.cols();
  Matrix q = Matrix::Zero(m + n, m + n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < m; ++j) {
      const double w = 0.5 * zeta(j, k) * (zeta(j, k) + 1.0);
      q(j, j) += w;
      q(m + k, m + k) += w;
      q(j, m + k) += w;
      q(m + k, j) += w;
    }
  return q;
}

QuadraticModel build_quadratic(const Matrix& zeta, const Margins& margins, Hyperplane hyperplane) {
  const int m = margins.m();
  const int n = margins.n();
  if (zeta.rows() != m || zeta.cols() != n)
    throw Error(ErrorKind::ShapeMismatch, "typical matrix shape does not match margins");

  QuadraticModel model;
  model.m = m;
  model.n = n;
  if (hyperplane.side == Hyperplane::Side::Col && hyperplane.index < 0) hyperplane.index = n - 1;
  model.hyperplane = hyperplane;
  const int pinned = pinned_flat(hyperplane, m, n);
  const int d = m + n - 1;

  // Q is the Hessian of q on the hyperplane: diagonal a_j / b_k, and the
  // bipartite block zeta^2 + zeta. Everything else is zero.
  model.Q = Matrix::Zero(d, d);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < m; ++j) {
      const double w = zeta(j, k) * (zeta(j, k) + 1.0);
      const int s = reduced_index(j, pinned);
      const int t = reduced_index(m + k, pinned);
      if (s >= 0) model.Q(s, s) += w;
      if (t >= 0) model.Q(t, t) += w;
      if (s >= 0 && t >= 0) {
        model.Q(s, t) = w;
        model.Q(t, s) = w;
      }
    }

  Eigen::LLT<Matrix> llt(model.Q);
  if (llt.info() != Eigen::Success || !(zeta.array() > 0).all())
    throw Error(ErrorKind::NotPositiveDefinite, "quadratic form is not positive definite");
  model.cholesky_lower = llt.matrixL();
  model.logdet_Q = 2.0 * model.cholesky_lower.diagonal().array().log().sum();
  model.logdet_qL = (1.0 - m - n) * std::numbers::ln2 + model.logdet_Q;
  model.logdet_qH = std::log(static_cast<double>(m + n)) + model.logdet_qL;
  model.Sigma = llt.solve(Matrix::Identity(d, d));
  model.Sigma = 0.5 * (model.Sigma + model.Sigma.transpose()).eval();
  return model;
}

double pair_sum_covariance(const QuadraticModel& model, int j1, int k1, int j2, int k2) {
  if (j1 < 0 || j2 < 0 || j1 >= model.m || j2 >= model.m || k1 < 0 || k2 < 0 || k1 >= model.n ||
      k2 >= model.n)
    throw Error(ErrorKind::IndexOutOfRange, "pair index out of range");
  const int a[2] = {model.s_index(j1), model.t_index(k1)};
  const int b[2] = {model.s_index(j2), model.t_index(k2)};
  double cov = 0;
  for (int x : a) {
    if (x < 0) continue;
    for (int y : b)
      if (y >= 0) cov += model.Sigma(x, y);
  }
  return cov;
}

double gaussian_log_count(double g_of_Z, const QuadraticModel& model, int m, int n) {
  const double dim = m + n - 1;
  return g_of_Z + 0.5 * std::log(static_cast<double>(m + n)) -
         0.5 * dim * std::log(4.0 * std::numbers::pi) - 0.5 * model.logdet_qH;
}

CovarianceDiagnostics covariance_diagnostics(const Matrix& zeta, double delta, double tau) {
  CovarianceDiagnostics diag;
  const Matrix w = (zeta.array() * (zeta.array() + 1.0)).matrix();
  diag.a = w.rowwise().sum();
  diag.b = w.colwise().sum().transpose();
  const double mn = static_cast<double>(zeta.rows()) * static_cast<double>(zeta.cols());
  diag.delta_bound = 12.0 / (std::pow(delta, 7.5) * (tau * tau + tau) * mn);
  return diag;
}

namespace {

nlohmann::json matrix_json(const Matrix& a) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(a.size()));
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) flat.push_back(a(r, c));
  return {{"rows", a.rows()}, {"cols", a.cols()}, {"data", flat}};
}

}  // namespace

std::string quadratic_to_json(const QuadraticModel& model) {
  nlohmann::json j;
  j["schema"] = 1;
  j["pinned"] = {{"side", model.hyperplane.side == Hyperplane::Side::Row ? "s" : "t"},
                 {"index", model.hyperplane.index}};
  j["Q"] = matrix_json(model.Q);
  j["Sigma"] = matrix_json(model.Sigma);
  j["logdet_Q"] = model.logdet_Q;
  j["logdet_qL"] = model.logdet_qL;
  j["logdet_qH"] = model.logdet_qH;
  return j.dump();
}

}  // namespace ctcount
