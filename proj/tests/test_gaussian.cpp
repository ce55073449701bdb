#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "support.hpp"

#include "ctcount/errors.hpp"
#include "ctcount/gaussian.hpp"
#include "ctcount/typical.hpp"

using namespace ctcount;

namespace {

ref::Dense to_dense(const Matrix& a) {
  ref::Dense out(static_cast<std::size_t>(a.rows()), std::vector<double>(static_cast<std::size_t>(a.cols())));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out[i][j] = a(i, j);
  return out;
}

Margins random_margins(std::mt19937_64& rng, int max_dim, std::int64_t max_total) {
  const int m = 2 + static_cast<int>(rng() % (max_dim - 1)), n = 2 + static_cast<int>(rng() % (max_dim - 1));
  const std::int64_t N = std::max(m, n) + static_cast<std::int64_t>(rng() % max_total);
  return validate_margins(ref::random_composition(rng, N, m), ref::random_composition(rng, N, n));
}

}  // namespace

TEST_CASE("2x2 unit margins") {
  const Margins mg = validate_margins({1, 1}, {1, 1});
  const auto sol = solve_typical(mg);
  const auto model = build_quadratic(sol.Z.zeta, mg);
  Matrix expected(3, 3);
  expected << 1.5, 0, 0.75, 0, 1.5, 0.75, 0.75, 0.75, 1.5;
  CHECK((model.Q - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::exp(model.logdet_Q) == doctest::Approx(1.6875).epsilon(1e-12));
  CHECK(std::exp(model.logdet_qL) == doctest::Approx(0.2109375).epsilon(1e-12));
  CHECK(std::exp(model.logdet_qH) == doctest::Approx(0.84375).epsilon(1e-12));

  // Cofactor inverse: diagonal (1, 1, 4/3), Sigma_12 = 1/3, Sigma_13 = Sigma_23 = -2/3.
  CHECK(model.Sigma(0, 0) == doctest::Approx(1.0));
  CHECK(model.Sigma(2, 2) == doctest::Approx(4.0 / 3));
  CHECK(model.Sigma(0, 1) == doctest::Approx(1.0 / 3));
  CHECK(model.Sigma(0, 2) == doctest::Approx(-2.0 / 3));
  CHECK(pair_sum_covariance(model, 0, 0, 0, 0) == doctest::Approx(1.0));
  CHECK(pair_sum_covariance(model, 0, 1, 0, 1) == doctest::Approx(1.0));
  CHECK(pair_sum_covariance(model, 0, 0, 1, 1) == doctest::Approx(-1.0 / 3));
  CHECK(pair_sum_covariance(model, 0, 0, 0, 1) == doctest::Approx(1.0 / 3));
  CHECK(pair_sum_covariance(model, 0, 0, 1, 0) == doctest::Approx(1.0 / 3));
  CHECK(pair_sum_covariance(model, 0, 1, 1, 0) == doctest::Approx(-1.0 / 3));

  const double g = 4 * ref::g_term(0.5);
  const double expected_log = g + 0.5 * std::log(4.0) - 1.5 * std::log(4 * M_PI) - 0.5 * std::log(0.84375);
  CHECK(gaussian_log_count(sol.g_of_Z, model, 2, 2) == doctest::Approx(expected_log).epsilon(1e-12));
  CHECK(gaussian_log_count(sol.g_of_Z, model, 2, 2) == doctest::Approx(0.80065).epsilon(1e-5));
  CHECK(std::exp(gaussian_log_count(sol.g_of_Z, model, 2, 2)) == doctest::Approx(2.2269).epsilon(1e-4));
}

TEST_CASE("model invariants against an independent inverse") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Margins mg = random_margins(rng, 7, 200);
    const auto sol = solve_typical(mg);
    const auto model = build_quadratic(sol.Z.zeta, mg);
    const int m = mg.m(), n = mg.n(), d = m + n - 1;
    CAPTURE(margins_to_json(mg));

    const ref::Dense Qref = ref::explicit_Q(to_dense(sol.Z.zeta), mg.rows(), mg.cols());
    const ref::Dense Sref = ref::inverse(Qref);
    const double qscale = model.Q.cwiseAbs().maxCoeff();
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        CHECK(std::abs(model.Q(a, b) - Qref[a][b]) <= 1e-8 * qscale);
        CHECK(std::abs(model.Sigma(a, b) - Sref[a][b]) <= 1e-8 * std::max(1.0, std::abs(Sref[a][b])));
        // Only diagonal and row/column block entries are nonzero.
        if (a != b && ((a < m) == (b < m))) CHECK(model.Q(a, b) == 0.0);
      }
    CHECK((model.Q * model.Sigma - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(model.logdet_Q == doctest::Approx(ref::log_det(Qref)).epsilon(1e-10));
    CHECK(model.logdet_qL == doctest::Approx((1 - m - n) * std::log(2.0) + model.logdet_Q).epsilon(1e-12));
    CHECK(model.logdet_qH == doctest::Approx(std::log(m + n) + model.logdet_qL).epsilon(1e-12));

    const auto diag = covariance_diagnostics(sol.Z.zeta, 0.5, 1.0);
    for (int j = 0; j < m; ++j) CHECK(std::abs(diag.a(j) - model.Q(j, j)) <= 1e-10 * model.Q(j, j));
    for (int k = 0; k + 1 < n; ++k)
      CHECK(std::abs(diag.b(k) - model.Q(m + k, m + k)) <= 1e-10 * model.Q(m + k, m + k));
    for (int j = 0; j < m; ++j) CHECK(model.Q(j, j) >= 0.0);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k) CHECK(pair_sum_covariance(model, j, k, j, k) > 0);
  }
}

TEST_CASE("hyperplane independence") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 15; ++trial) {
    const Margins mg = random_margins(rng, 6, 150);
    const int m = mg.m(), n = mg.n();
    const auto sol = solve_typical(mg);
    const auto a = build_quadratic(sol.Z.zeta, mg, Hyperplane::drop_t(n - 1));
    const auto b = build_quadratic(sol.Z.zeta, mg, Hyperplane::drop_s(0));
    const auto c = build_quadratic(sol.Z.zeta, mg, Hyperplane::drop_t(0));
    double worst = 0;
    for (int j1 = 0; j1 < m; ++j1)
      for (int k1 = 0; k1 < n; ++k1)
        for (int j2 = 0; j2 < m; ++j2)
          for (int k2 = 0; k2 < n; ++k2) {
            const double x = pair_sum_covariance(a, j1, k1, j2, k2);
            worst = std::max(worst, std::abs(x - pair_sum_covariance(b, j1, k1, j2, k2)));
            worst = std::max(worst, std::abs(x - pair_sum_covariance(c, j1, k1, j2, k2)));
          }
    CHECK(worst <= 1e-8);
    CHECK(a.logdet_qH == doctest::Approx(b.logdet_qH).epsilon(1e-10));
  }
}

TEST_CASE("determinant of the restriction") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 15; ++trial) {
    const Margins mg = random_margins(rng, 6, 150);
    const auto sol = solve_typical(mg);
    const auto model = build_quadratic(sol.Z.zeta, mg);
    Eigen::SelfAdjointEigenSolver<Matrix> es(full_form(sol.Z.zeta));
    const Vector ev = es.eigenvalues();
    // The smallest eigenvalue is the null direction.
    CHECK(std::abs(ev(0)) <= 1e-10 * ev.maxCoeff());
    double log_prod = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i) log_prod += std::log(ev(i));
    CHECK(std::abs(std::expm1(log_prod - (std::log(mg.m() + mg.n()) + model.logdet_qL))) <= 1e-8);
  }
}

TEST_CASE("spectrum of the unit form") {
  const double golden = (std::sqrt(5.0) - 1) / 2;  // zeta^2 + zeta = 1
  for (auto [m, n] : {std::pair{2, 2}, {3, 5}, {6, 4}, {1, 7}, {9, 9}}) {
    const Matrix q0 = full_form(Matrix::Constant(m, n, golden));
    // Hand-built unit form: diagonal n/2 and m/2, bipartite block 1/2.
    Matrix hand = Matrix::Zero(m + n, m + n);
    for (int j = 0; j < m; ++j) hand(j, j) = n / 2.0;
    for (int k = 0; k < n; ++k) hand(m + k, m + k) = m / 2.0;
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k) hand(j, m + k) = hand(m + k, j) = 0.5;
    CHECK((q0 - hand).cwiseAbs().maxCoeff() <= 1e-15);

    Eigen::SelfAdjointEigenSolver<Matrix> es(hand);
    std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + m + n);
    std::vector<double> want{0.0, (m + n) / 2.0};
    for (int i = 0; i < n - 1; ++i) want.push_back(m / 2.0);
    for (int i = 0; i < m - 1; ++i) want.push_back(n / 2.0);
    std::sort(want.begin(), want.end());
    for (int i = 0; i < m + n; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-10);
  }
}

TEST_CASE("constant typical matrix determinant") {
  for (auto [m, n] : {std::pair{2, 2}, {2, 3}, {4, 3}, {5, 5}, {1, 4}}) {
    const Margins mg = validate_margins(std::vector<std::int64_t>(m, n), std::vector<std::int64_t>(n, m));
    const auto sol = solve_typical(mg);
    CHECK((sol.Z.zeta.array() - 1.0).abs().maxCoeff() < 1e-10);
    const auto model = build_quadratic(sol.Z.zeta, mg);
    const double z = 1.0;
    const double want = (m + n - 1) * std::log(z * z + z) + (n - 1) * std::log(m / 2.0) +
                        (m - 1) * std::log(n / 2.0) + std::log((m + n) / 2.0);
    CHECK(model.logdet_qH == doctest::Approx(want).epsilon(1e-10));
  }
  const Margins half = validate_margins({1, 1}, {1, 1});
  const auto model = build_quadratic(Matrix::Constant(2, 2, 0.5), half);
  CHECK(std::exp(model.logdet_qH) == doctest::Approx(std::pow(0.75, 3) * 2).epsilon(1e-12));
}

TEST_CASE("covariance bounds on smooth instances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + static_cast<int>(rng() % 18), n = 3 + static_cast<int>(rng() % 18);
    auto rows = ref::spread_vector(rng, m, 4 * n, 1.5);
    auto cols = ref::spread_vector(rng, n, 4 * m, 1.5);
    ref::balance(rows, cols);
    const Margins mg = validate_margins(rows, cols);
    const auto sol = solve_typical(mg);
    const auto rep = smoothness_report(mg, sol.Z.zeta);
    const double delta = rep.delta();
    const auto diag = covariance_diagnostics(sol.Z.zeta, delta, rep.tau);
    CHECK(diag.delta_bound ==
          doctest::Approx(12.0 / (std::pow(delta, 7.5) * (rep.tau * rep.tau + rep.tau) * m * n)));
    const auto model = build_quadratic(sol.Z.zeta, mg);
    const double D = diag.delta_bound;
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(D);
    double worst_far = 0, worst_row = 0, worst_var = 0;
    for (int j1 = 0; j1 < m; ++j1)
      for (int k1 = 0; k1 < n; ++k1) {
        worst_var = std::max(worst_var, std::abs(pair_sum_covariance(model, j1, k1, j1, k1) -
                                                 1 / diag.a(j1) - 1 / diag.b(k1)));
        for (int k2 = 0; k2 < n; ++k2)
          if (k2 != k1)
            worst_row = std::max(worst_row,
                                 std::abs(pair_sum_covariance(model, j1, k1, j1, k2) - 1 / diag.a(j1)));
        for (int j2 = 0; j2 < m; ++j2)
          for (int k2 = 0; k2 < n; ++k2)
            if (j2 != j1 && k2 != k1)
              worst_far = std::max(worst_far, std::abs(pair_sum_covariance(model, j1, k1, j2, k2)));
      }
    CHECK(worst_far <= D);
    CHECK(worst_row <= D);
    CHECK(worst_var <= D);
  }
}

TEST_CASE("errors") {
  const Margins mg = validate_margins({1, 1}, {1, 1});
  CHECK_THROWS_AS(build_quadratic(Matrix::Constant(3, 2, 0.5), mg), Error);
  Matrix broken = Matrix::Constant(2, 2, 0.5);
  broken(0, 1) = -0.5;
  try {
    build_quadratic(broken, mg);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
  }
  const auto model = build_quadratic(Matrix::Constant(2, 2, 0.5), mg);
  try {
    pair_sum_covariance(model, 0, 2, 0, 0);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndexOutOfRange);
  }
}
