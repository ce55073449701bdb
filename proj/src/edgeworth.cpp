#include "ctcount/edgeworth.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <vector>

#include "json.hpp"

#include "ctcount/errors.hpp"

namespace ctcount {

double cubic_coefficient(double z) { return z * (z + 1.0) * (2.0 * z + 1.0) / 6.0; }

double quartic_coefficient(double z) {
  return z * (z + 1.0) * (6.0 * z * z + 6.0 * z + 1.0) / 24.0;
}

Matrix embedded_covariance(const QuadraticModel& model) {
  const int full = model.m + model.n;
  std::vector<int> reduced(full);
  for (int j = 0; j < model.m; ++j) reduced[j] = model.s_index(j);
  for (int k = 0; k < model.n; ++k) reduced[model.m + k] = model.t_index(k);
  Matrix S = Matrix::Zero(full, full);
  for (int y = 0; y < full; ++y) {
    if (reduced[y] < 0) continue;
    for (int x = 0; x < full; ++x)
      if (reduced[x] >= 0) S(x, y) = model.Sigma(reduced[x], reduced[y]);
  }
  return S;
}

namespace {

// Var(s_j + t_k) for every cell, from the embedded covariance.
Matrix pair_variances(const Matrix& S, int m, int n) {
  Matrix var(m, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < m; ++j) var(j, k) = S(j, j) + 2.0 * S(j, m + k) + S(m + k, m + k);
  return var;
}

// Straight double loop over the public covariance query; kept as the
// reference the tiled kernel is tested against.
double mu_serial(const Matrix& zeta, const QuadraticModel& model) {
  const int m = model.m, n = model.n;
  double mu = 0;
  for (int k1 = 0; k1 < n; ++k1)
    for (int j1 = 0; j1 < m; ++j1) {
      const double c1 = cubic_coefficient(zeta(j1, k1));
      const double v1 = pair_sum_covariance(model, j1, k1, j1, k1);
      for (int k2 = 0; k2 < n; ++k2)
        for (int j2 = 0; j2 < m; ++j2) {
          const double c2 = cubic_coefficient(zeta(j2, k2));
          const double v2 = pair_sum_covariance(model, j2, k2, j2, k2);
          const double rho = pair_sum_covariance(model, j1, k1, j2, k2);
          mu += c1 * c2 * (9.0 * v1 * v2 * rho + 6.0 * rho * rho * rho);
        }
    }
  return mu;
}

constexpr int kMuTile = 32;

// Tiles of kMuTile consecutive cells (column-major flat index). For a fixed
// outer cell p, u = Cov(w_p, .) over all m+n coordinates, so
// Cov(w_p, w_{j'k'}) = u[j'] + u[m+k'] and the inner loop is O(mn) with no
// Sigma gathers. Partial sums are reduced in tile order.
double mu_tiled(const Matrix& zeta, const QuadraticModel& model) {
  const int m = model.m, n = model.n;
  const int cells = m * n;
  const Matrix S = embedded_covariance(model);
  const Matrix var = pair_variances(S, m, n);
  Matrix cv(m, n);  // c_p * Var_p
  Matrix c(m, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < m; ++j) {
      c(j, k) = cubic_coefficient(zeta(j, k));
      cv(j, k) = c(j, k) * var(j, k);
    }

  const int tiles = (cells + kMuTile - 1) / kMuTile;
  std::vector<double> partial(static_cast<std::size_t>(tiles), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int tile = 0; tile < tiles; ++tile) {
    Vector u(m + n);
    double acc = 0;
    const int end = std::min(cells, (tile + 1) * kMuTile);
    for (int p = tile * kMuTile; p < end; ++p) {
      const int j = p % m, k = p / m;
      u = S.col(j) + S.col(m + k);
      double inner = 0;
      for (int k2 = 0; k2 < n; ++k2) {
        const double ut = u[m + k2];
        for (int j2 = 0; j2 < m; ++j2) {
          const double rho = u[j2] + ut;
          inner += 9.0 * cv(j, k) * cv(j2, k2) * rho + 6.0 * c(j, k) * c(j2, k2) * rho * rho * rho;
        }
      }
      acc += inner;
    }
    partial[static_cast<std::size_t>(tile)] = acc;
  }
  double mu = 0;
  for (double v : partial) mu += v;
  return mu;
}

}  // namespace

double nu_term(const Matrix& zeta, const QuadraticModel& model) {
  const Matrix S = embedded_covariance(model);
  const Matrix var = pair_variances(S, model.m, model.n);
  double nu = 0;
  for (int k = 0; k < model.n; ++k)
    for (int j = 0; j < model.m; ++j)
      nu += quartic_coefficient(zeta(j, k)) * 3.0 * var(j, k) * var(j, k);
  return nu;
}

double mu_term(const Matrix& zeta, const QuadraticModel& model, Exec exec) {
  if (zeta.rows() != model.m || zeta.cols() != model.n)
    throw Error(ErrorKind::ShapeMismatch, "typical matrix does not match model");
  return exec == Exec::Serial ? mu_serial(zeta, model) : mu_tiled(zeta, model);
}

EdgeworthTerms edgeworth_terms(const Matrix& zeta, const QuadraticModel& model) {
  EdgeworthTerms t;
  t.mu = mu_term(zeta, model);
  t.nu = nu_term(zeta, model);
  t.log_factor = -0.5 * t.mu + t.nu;
  return t;
}

CountEstimate estimate_from_solution(const TypicalSolution& sol, const Margins& margins) {
  const QuadraticModel model = build_quadratic(sol.Z.zeta, margins);
  const EdgeworthTerms terms = edgeworth_terms(sol.Z.zeta, model);
  CountEstimate est;
  est.g_of_Z = sol.g_of_Z;
  est.logdet_qH = model.logdet_qH;
  est.gaussian_log = gaussian_log_count(sol.g_of_Z, model, margins.m(), margins.n());
  est.mu = terms.mu;
  est.nu = terms.nu;
  est.edgeworth_log_factor = terms.log_factor;
  est.log_count = est.gaussian_log + est.edgeworth_log_factor;
  est.iterations = sol.iterations;
  return est;
}

CountEstimate estimate_count(const Margins& margins, const EstimateConfig& cfg) {
  return estimate_from_solution(solve_typical(margins, cfg.typical), margins);
}

namespace {

constexpr std::int64_t kMcBlock = 4096;

struct MomentSums {
  double f2 = 0, f4 = 0, h = 0, h2 = 0, h3 = 0, h4 = 0, cs = 0, cs2 = 0, sn = 0, sn2 = 0;
  MomentSums& operator+=(const MomentSums& o) {
    f2 += o.f2; f4 += o.f4; h += o.h; h2 += o.h2; h3 += o.h3; h4 += o.h4;
    cs += o.cs; cs2 += o.cs2; sn += o.sn; sn2 += o.sn2;
    return *this;
  }
};

MomentSums sample_block(const Matrix& chol_sigma, const std::vector<int>& coord_of, const Matrix& c3,
                        const Matrix& c4, std::int64_t count, std::uint64_t seed,
                        std::uint64_t block) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  const Eigen::Index d = chol_sigma.rows();
  const int m = static_cast<int>(c3.rows()), n = static_cast<int>(c3.cols());
  Vector z(d), x(d), full(m + n);
  MomentSums s;
  for (std::int64_t i = 0; i < count; ++i) {
    for (Eigen::Index a = 0; a < d; ++a) z[a] = normal(rng);
    x.noalias() = chol_sigma.triangularView<Eigen::Lower>() * z;
    for (int a = 0; a < m + n; ++a) full[a] = coord_of[a] < 0 ? 0.0 : x[coord_of[a]];
    double f = 0, h = 0;
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < m; ++j) {
        const double w = full[j] + full[m + k];
        const double w2 = w * w;
        f += c3(j, k) * w2 * w;
        h += c4(j, k) * w2 * w2;
      }
    const double f2 = f * f;
    s.f2 += f2;
    s.f4 += f2 * f2;
    s.h += h;
    s.h2 += h * h;
    s.h3 += h * h * h;
    s.h4 += h * h * h * h;
    const double cf = std::cos(f), sf = std::sin(f);
    s.cs += cf;
    s.cs2 += cf * cf;
    s.sn += sf;
    s.sn2 += sf * sf;
  }
  return s;
}

}  // namespace

MonteCarloMoments mc_expectations(const QuadraticModel& model, const Matrix& zeta,
                                  std::int64_t samples, std::uint64_t seed, Exec exec) {
  if (samples < 1000) throw Error(ErrorKind::InvalidArgument, "need at least 1000 samples");
  Eigen::LLT<Matrix> llt(model.Sigma);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::NotPositiveDefinite, "covariance is not positive definite");
  const Matrix chol = llt.matrixL();

  std::vector<int> coord_of(model.m + model.n);
  for (int j = 0; j < model.m; ++j) coord_of[j] = model.s_index(j);
  for (int k = 0; k < model.n; ++k) coord_of[model.m + k] = model.t_index(k);
  Matrix c3(model.m, model.n), c4(model.m, model.n);
  for (int k = 0; k < model.n; ++k)
    for (int j = 0; j < model.m; ++j) {
      c3(j, k) = cubic_coefficient(zeta(j, k));
      c4(j, k) = quartic_coefficient(zeta(j, k));
    }

  const std::int64_t blocks = (samples + kMcBlock - 1) / kMcBlock;
  std::vector<MomentSums> partial(static_cast<std::size_t>(blocks));
  auto run = [&](std::int64_t b) {
    const std::int64_t count = std::min(kMcBlock, samples - b * kMcBlock);
    partial[static_cast<std::size_t>(b)] =
        sample_block(chol, coord_of, c3, c4, count, seed, static_cast<std::uint64_t>(b));
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t b = 0; b < blocks; ++b) run(b);
  } else {
    for (std::int64_t b = 0; b < blocks; ++b) run(b);
  }
  MomentSums s;
  for (const auto& p : partial) s += p;

  const double N = static_cast<double>(samples);
  auto var_of = [&](double sum, double sum_sq) {
    const double mean = sum / N;
    return std::max(0.0, (sum_sq / N - mean * mean) * N / (N - 1.0));
  };
  MonteCarloMoments out;
  out.samples = samples;
  out.mu_hat = s.f2 / N;
  out.mu_se = std::sqrt(var_of(s.f2, s.f4) / N);
  out.nu_hat = s.h / N;
  out.nu_se = std::sqrt(var_of(s.h, s.h2) / N);
  out.var_h_hat = var_of(s.h, s.h2);
  // Delta-method standard error of the sample variance from central moments.
  {
    const double mean = s.h / N;
    const double m2 = s.h2 / N - mean * mean;
    const double m4 = s.h4 / N - 4 * mean * s.h3 / N + 6 * mean * mean * s.h2 / N -
                      3 * mean * mean * mean * mean;
    out.var_h_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / N);
  }
  out.char_fn_hat = {s.cs / N, s.sn / N};
  out.char_fn_se = std::sqrt((var_of(s.cs, s.cs2) + var_of(s.sn, s.sn2)) / N);
  return out;
}

std::string decimal_from_log(double log_value) {
  if (!std::isfinite(log_value)) return log_value > 0 ? "inf" : (log_value < 0 ? "0" : "nan");
  const double log10v = log_value / std::numbers::ln10;
  auto exponent = static_cast<long long>(std::floor(log10v));
  const double mantissa = std::pow(10.0, log10v - static_cast<double>(exponent));
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  double digits = std::nearbyint(mantissa * 1e5);
  std::fesetround(saved);
  if (digits >= 1e6) {
    digits = std::nearbyint(digits / 10.0);
    ++exponent;
  } else if (digits < 1e5) {
    digits = 1e5;
  }
  const auto d = static_cast<long long>(digits);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%lld.%05llde%+lld", d / 100000, d % 100000, exponent);
  return buf;
}

std::string estimate_to_json(const CountEstimate& est) {
  nlohmann::json j;
  j["schema"] = 1;
  j["log_count"] = est.log_count;
  j["estimate"] = decimal_from_log(est.log_count);
  j["gaussian_log"] = est.gaussian_log;
  j["gaussian_estimate"] = decimal_from_log(est.gaussian_log);
  j["edgeworth_log_factor"] = est.edgeworth_log_factor;
  j["g_of_Z"] = est.g_of_Z;
  j["logdet_qH"] = est.logdet_qH;
  j["mu"] = est.mu;
  j["nu"] = est.nu;
  j["iterations"] = est.iterations;
  return j.dump();
}

}  // namespace ctcount
