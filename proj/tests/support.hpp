// Independent reference computations for the test suites. Nothing here calls
// into the library's numerics; plain vectors and textbook algorithms only.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ref {

using Dense = std::vector<std::vector<double>>;
using Big = boost::multiprecision::cpp_int;

// Gauss-Jordan with partial pivoting.
inline Dense inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0.0) throw std::runtime_error("singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

// ln |det| by elimination.
inline double log_det(Dense a) {
  const std::size_t n = a.size();
  double acc = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    acc += std::log(std::abs(a[c][c]));
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return acc;
}

// The matrix of the form on t_n = 0 from the explicit entry list:
// diagonal r_j + sum_k z^2 and c_k + sum_j z^2, off-diagonal z^2 + z.
inline Dense explicit_Q(const Dense& z, const std::vector<std::int64_t>& rows,
                        const std::vector<std::int64_t>& cols) {
  const std::size_t m = rows.size(), n = cols.size(), d = m + n - 1;
  Dense q(d, std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    q[j][j] = static_cast<double>(rows[j]);
    for (std::size_t k = 0; k < n; ++k) q[j][j] += z[j][k] * z[j][k];
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    q[m + k][m + k] = static_cast<double>(cols[k]);
    for (std::size_t j = 0; j < m; ++j) q[m + k][m + k] += z[j][k] * z[j][k];
    for (std::size_t j = 0; j < m; ++j) q[j][m + k] = q[m + k][j] = z[j][k] * z[j][k] + z[j][k];
  }
  return q;
}

// Cov(s_j1 + t_k1, s_j2 + t_k2) from the inverse on t_n = 0.
inline double pair_cov(const Dense& sigma, std::size_t m, std::size_t n, std::size_t j1, std::size_t k1,
                       std::size_t j2, std::size_t k2) {
  auto idx = [&](bool row, std::size_t i) -> long {
    if (row) return static_cast<long>(i);
    return i + 1 == n ? -1 : static_cast<long>(m + i);
  };
  const long a[2] = {idx(true, j1), idx(false, k1)};
  const long b[2] = {idx(true, j2), idx(false, k2)};
  double v = 0;
  for (long x : a)
    for (long y : b)
      if (x >= 0 && y >= 0) v += sigma[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
  return v;
}

struct Moments {
  double mu = 0, nu = 0, gaussian_log = 0, log_det_Q = 0;
};

// Full formula from a typical matrix, straight from the definitions.
inline Moments formula(const Dense& z, const std::vector<std::int64_t>& rows,
                       const std::vector<std::int64_t>& cols, double g) {
  const std::size_t m = rows.size(), n = cols.size();
  const Dense Q = explicit_Q(z, rows, cols);
  const Dense S = inverse(Q);
  Moments out;
  out.log_det_Q = log_det(Q);
  const double mn = static_cast<double>(m + n);
  const double log_qH = std::log(mn) + (1.0 - mn) * std::log(2.0) + out.log_det_Q;
  out.gaussian_log = g + 0.5 * std::log(mn) - (mn - 1) / 2 * std::log(4 * M_PI) - 0.5 * log_qH;
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const double x = z[j][k];
      const double c4 = x * (x + 1) * (6 * x * x + 6 * x + 1) / 24;
      const double s = pair_cov(S, m, n, j, k, j, k);
      out.nu += 3 * c4 * s * s;
      for (std::size_t j2 = 0; j2 < m; ++j2)
        for (std::size_t k2 = 0; k2 < n; ++k2) {
          const double y = z[j2][k2];
          const double c = x * (x + 1) * (2 * x + 1) / 6 * y * (y + 1) * (2 * y + 1) / 6;
          const double s2 = pair_cov(S, m, n, j2, k2, j2, k2);
          const double r = pair_cov(S, m, n, j, k, j2, k2);
          out.mu += c * (9 * s * s2 * r + 6 * r * r * r);
        }
    }
  return out;
}

// Textbook form in extended precision so large arguments keep their digits.
inline double g_term(double x) {
  if (x == 0) return 0;
  const long double y = x;
  return static_cast<double>((y + 1) * std::log(y + 1) - y * std::log(y));
}

inline double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double phi = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-12) {
    if (f1 > f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    }
  }
  return (a + b) / 2;
}

// Mean of the integrand over the full uniform tensor grid, t_n = 0, with no
// factorization: sum over every node of prod phases / prod (1 + z - z e^{i(s+t)}).
inline std::complex<double> tensor_mean(const Dense& z, const std::vector<std::int64_t>& rows,
                                        const std::vector<std::int64_t>& cols, int G) {
  const std::size_t m = rows.size(), n = cols.size(), d = m + n - 1;
  std::vector<int> idx(d, 0);
  std::complex<double> sum = 0;
  auto theta = [&](int i) { return -M_PI + 2 * M_PI * i / G; };
  for (;;) {
    std::vector<double> s(m), t(n, 0.0);
    double arg = 0;
    for (std::size_t j = 0; j < m; ++j) {
      s[j] = theta(idx[j]);
      arg -= static_cast<double>(rows[j]) * s[j];
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      t[k] = theta(idx[m + k]);
      arg -= static_cast<double>(cols[k]) * t[k];
    }
    std::complex<double> v = std::polar(1.0, arg);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t k = 0; k < n; ++k) v /= 1.0 + z[j][k] - z[j][k] * std::polar(1.0, s[j] + t[k]);
    sum += v;
    std::size_t a = 0;
    for (; a < d; ++a) {
      if (++idx[a] < G) break;
      idx[a] = 0;
    }
    if (a == d) break;
  }
  return sum / std::pow(static_cast<double>(G), static_cast<double>(d));
}

// Column-at-a-time recursion memoized on the sorted remaining row sums.
inline Big count_tables(std::vector<std::int64_t> rows, const std::vector<std::int64_t>& cols) {
  std::map<std::pair<std::size_t, std::vector<std::int64_t>>, Big> memo;
  std::function<Big(std::size_t, std::vector<std::int64_t>)> go = [&](std::size_t k,
                                                                      std::vector<std::int64_t> left) -> Big {
    std::sort(left.begin(), left.end());
    if (k + 1 == cols.size()) {
      std::int64_t sum = 0;
      for (auto v : left) sum += v;
      return sum == cols[k] ? Big(1) : Big(0);
    }
    auto key = std::make_pair(k, left);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Big total = 0;
    std::vector<std::int64_t> cur = left;
    std::function<void(std::size_t, std::int64_t)> place = [&](std::size_t i, std::int64_t need) {
      if (i == cur.size()) {
        if (need == 0) total += go(k + 1, cur);
        return;
      }
      const std::int64_t orig = cur[i];
      for (std::int64_t x = 0; x <= std::min(orig, need); ++x) {
        cur[i] = orig - x;
        place(i + 1, need - x);
      }
      cur[i] = orig;
    };
    place(0, cols[k]);
    memo[key] = total;
    return total;
  };
  return go(0, std::move(rows));
}

// A positive composition of total into parts pieces, uniformly over cut sets.
inline std::vector<std::int64_t> random_composition(std::mt19937_64& rng, std::int64_t total, int parts) {
  std::vector<std::int64_t> cuts;
  std::vector<std::int64_t> pool;
  for (std::int64_t i = 1; i < total; ++i) pool.push_back(i);
  std::shuffle(pool.begin(), pool.end(), rng);
  cuts.assign(pool.begin(), pool.begin() + (parts - 1));
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::int64_t> out;
  std::int64_t prev = 0;
  for (auto c : cuts) {
    out.push_back(c - prev);
    prev = c;
  }
  out.push_back(total - prev);
  return out;
}

// Margins whose entries lie within a factor spread of a base value.
inline std::vector<std::int64_t> spread_vector(std::mt19937_64& rng, int len, std::int64_t base, double spread) {
  std::uniform_real_distribution<double> u(1.0, spread);
  std::vector<std::int64_t> v(static_cast<std::size_t>(len));
  for (auto& x : v) x = static_cast<std::int64_t>(std::llround(base * u(rng)));
  return v;
}

// Adjusts the larger-sum side so both sides share a total.
inline void balance(std::vector<std::int64_t>& rows, std::vector<std::int64_t>& cols) {
  std::int64_t r = 0, c = 0;
  for (auto x : rows) r += x;
  for (auto x : cols) c += x;
  auto& big = r > c ? rows : cols;
  std::int64_t excess = r > c ? r - c : c - r;
  for (std::size_t i = 0; excess > 0; i = (i + 1) % big.size()) {
    if (big[i] > 1) {
      --big[i];
      --excess;
    }
  }
}

}  // namespace ref
