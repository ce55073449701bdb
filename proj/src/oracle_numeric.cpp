#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "ctcount/errors.hpp"
#include "ctcount/oracle.hpp"

namespace ctcount {

namespace {

using cplx = std::complex<double>;

// Chernoff bound on ln P(sum of independent geometrics >= level), where
// entry i has ratio rho_i = zeta_i / (1 + zeta_i):
//   ln P <= min_{0 < l < -ln max rho} -l level + sum ln((1 - rho_i) / (1 - rho_i e^l)).
double log_tail_bound(const std::vector<double>& rho, double level) {
  const double rho_max = *std::max_element(rho.begin(), rho.end());
  const double upper = -std::log(rho_max);
  auto objective = [&](double l) {
    double v = -l * level;
    for (double r : rho) v += std::log1p(-r) - std::log1p(-r * std::exp(l));
    return v;
  };
  // Convex in l; golden-section search.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0, b = upper * (1 - 1e-12);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = objective(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = objective(x2);
    }
  }
  return std::min({0.0, f1, f2});
}

}  // namespace

// The trapezoid mean over a grid with G_a points on axis a equals the sum of
// P(Y = target + shift) over all shifts that are multiples of G_a on each
// axis. With every G_a > N only non-negative shifts survive, so the aliasing
// error is at most the union of tails P(Y_a >= target_a + G_a), and relative
// to the count it is that times e^{g(Z)} / #(R,C) <= e^{g(Z)}.
std::vector<int> auto_quadrature_grid(const TypicalSolution& solution, const Margins& margins,
                                      double alias_tol) {
  const Matrix& zeta = solution.Z.zeta;
  const int m = margins.m(), n = margins.n();
  const int dim = m + n - 1;
  const double budget = std::log(alias_tol) - solution.g_of_Z - std::log(static_cast<double>(dim));
  const auto N = margins.total();

  auto axis_grid = [&](const std::vector<double>& rho, std::int64_t target) {
    int G = static_cast<int>(2 * N + 2);
    while (log_tail_bound(rho, static_cast<double>(target + G)) > budget) G += 1;
    return G;
  };

  std::vector<int> grid;
  for (int j = 0; j < m; ++j) {
    std::vector<double> rho(n);
    for (int k = 0; k < n; ++k) rho[k] = zeta(j, k) / (1.0 + zeta(j, k));
    grid.push_back(axis_grid(rho, margins.rows()[j]));
  }
  for (int k = 0; k + 1 < n; ++k) {
    std::vector<double> rho(m);
    for (int j = 0; j < m; ++j) rho[j] = zeta(j, k) / (1.0 + zeta(j, k));
    grid.push_back(axis_grid(rho, margins.cols()[k]));
  }
  return grid;
}

double quadrature_work(const std::vector<int>& grid, int m, int n) {
  double outer = 1, inner = 0;
  for (int k = 0; k + 1 < n; ++k) outer *= grid[static_cast<std::size_t>(m + k)];
  for (int j = 0; j < m; ++j) inner += grid[static_cast<std::size_t>(j)];
  return outer * inner * n;
}

namespace {

// For fixed t the integrand is a product over rows of functions of one s_j,
// so the tensor trapezoid sum is an outer sum over t nodes of a product of m
// one-dimensional sums. Returns the mean of the integrand over the grid.
cplx tensor_trapezoid(const Matrix& zeta, const Margins& margins, const std::vector<int>& grid, Exec exec) {
  const int m = margins.m(), n = margins.n();
  const int dim = m + n - 1;

  // Per axis: e^{i theta} and the phase e^{-i target theta} at every node.
  std::vector<std::vector<cplx>> node(dim), phase(dim);
  for (int a = 0; a < dim; ++a) {
    const double target = static_cast<double>(a < m ? margins.rows()[a] : margins.cols()[a - m]);
    for (int i = 0; i < grid[a]; ++i) {
      const double theta = -std::numbers::pi + 2.0 * std::numbers::pi * i / grid[a];
      node[a].push_back(std::polar(1.0, theta));
      phase[a].push_back(std::polar(1.0, -target * theta));
    }
  }

  std::int64_t outer = 1;
  for (int k = 0; k + 1 < n; ++k) outer *= grid[m + k];

  auto at = [&](std::int64_t flat) {
    std::vector<cplx> et(static_cast<std::size_t>(n), cplx(1.0, 0.0));
    cplx value(1.0, 0.0);
    for (int k = n - 2; k >= 0; --k) {
      const int g = grid[m + k];
      const auto i = static_cast<std::size_t>(flat % g);
      flat /= g;
      et[k] = node[m + k][i];
      value *= phase[m + k][i];
    }
    for (int j = 0; j < m; ++j) {
      cplx row(0.0, 0.0);
      for (int i = 0; i < grid[j]; ++i) {
        cplx term = phase[j][i];
        for (int k = 0; k < n; ++k) {
          const double z = zeta(j, k);
          term /= (1.0 + z) - z * (node[j][i] * et[k]);
        }
        row += term;
      }
      value *= row / static_cast<double>(grid[j]);
    }
    return value;
  };

  // Fixed chunks keep the summation order independent of the thread count.
  constexpr std::int64_t kChunk = 64;
  const std::int64_t chunks = (outer + kChunk - 1) / kChunk;
  std::vector<cplx> partial(static_cast<std::size_t>(chunks));
  auto run = [&](std::int64_t c) {
    cplx acc(0.0, 0.0);
    const std::int64_t end = std::min(outer, (c + 1) * kChunk);
    for (std::int64_t f = c * kChunk; f < end; ++f) acc += at(f);
    partial[static_cast<std::size_t>(c)] = acc;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < chunks; ++c) run(c);
  } else {
    for (std::int64_t c = 0; c < chunks; ++c) run(c);
  }
  cplx total(0.0, 0.0);
  for (const auto& p : partial) total += p;
  return total / static_cast<double>(outer);
}

}  // namespace

QuadratureResult integral_count(const TypicalSolution& solution, const Margins& margins,
                                const QuadratureConfig& cfg) {
  const int m = margins.m(), n = margins.n();
  const int dim = m + n - 1;
  if (dim > cfg.max_dim)
    throw Error(ErrorKind::DimensionTooLarge,
                "quadrature needs m + n - 1 <= " + std::to_string(cfg.max_dim));
  if (cfg.grid != 0 && cfg.grid <= margins.total())
    throw Error(ErrorKind::InvalidArgument, "quadrature grid must exceed the total N");

  // The same integral with s_m pinned instead of t_n is the rule on the transpose.
  TypicalSolution flipped;
  flipped.Z.zeta = solution.Z.zeta.transpose();
  flipped.g_of_Z = solution.g_of_Z;
  const Margins flipped_margins = margins.transposed();
  auto grid_for = [&](const TypicalSolution& sol, const Margins& mg) {
    return cfg.grid == 0 ? auto_quadrature_grid(sol, mg, cfg.alias_tol)
                         : std::vector<int>(static_cast<std::size_t>(dim), cfg.grid);
  };
  std::vector<int> grid = grid_for(solution, margins);
  std::vector<int> other = grid_for(flipped, flipped_margins);
  double work = quadrature_work(grid, m, n);
  const double other_work = quadrature_work(other, n, m);
  const bool transposed = other_work < work;
  if (transposed) {
    grid = std::move(other);
    work = other_work;
  }
  if (work > cfg.max_work) throw BudgetExceeded(work, "quadrature needs too many integrand evaluations");

  const cplx mean = transposed ? tensor_trapezoid(flipped.Z.zeta, flipped_margins, grid, cfg.exec)
                               : tensor_trapezoid(solution.Z.zeta, margins, grid, cfg.exec);
  const double torus = std::pow(2.0 * std::numbers::pi, dim);

  QuadratureResult out;
  out.real_part = mean.real() * torus;
  out.imag_part = mean.imag() * torus;
  out.grid_points_per_axis = std::move(grid);
  out.transposed = transposed;
  out.estimate = std::exp(solution.g_of_Z) * mean.real();
  return out;
}

GeometricMcResult geometric_mc_count(const TypicalSolution& solution, const Margins& margins,
                                     std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorKind::InvalidArgument, "need at least one sample");
  const int m = margins.m(), n = margins.n();
  const Matrix& zeta = solution.Z.zeta;
  constexpr std::int64_t kBlock = 1 << 16;
  const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::int64_t> hits(static_cast<std::size_t>(blocks), 0);

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t b = 0; b < blocks; ++b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::mt19937_64 rng(seq);
    std::vector<std::geometric_distribution<std::int64_t>> cell;
    cell.reserve(static_cast<std::size_t>(m * n));
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < n; ++k) cell.emplace_back(1.0 / (1.0 + zeta(j, k)));
    std::vector<std::int64_t> col(n);
    const std::int64_t count = std::min(kBlock, samples - b * kBlock);
    std::int64_t local = 0;
    for (std::int64_t s = 0; s < count; ++s) {
      std::fill(col.begin(), col.end(), 0);
      bool ok = true;
      for (int j = 0; j < m && ok; ++j) {
        std::int64_t row = 0;
        for (int k = 0; k < n; ++k) {
          const std::int64_t x = cell[static_cast<std::size_t>(j * n + k)](rng);
          row += x;
          col[k] += x;
        }
        ok = row == margins.rows()[j];
      }
      if (!ok) continue;
      for (int k = 0; k < n && ok; ++k) ok = col[k] == margins.cols()[k];
      if (ok) ++local;
    }
    hits[static_cast<std::size_t>(b)] = local;
  }

  GeometricMcResult out;
  out.samples = samples;
  for (auto h : hits) out.hits += h;
  const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
  const double scale = std::exp(solution.g_of_Z);
  out.estimate = scale * p;
  out.std_error = scale * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return out;
}

}  // namespace ctcount
