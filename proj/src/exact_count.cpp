#include "ctcount/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <optional>

#include "json.hpp"

#include "ctcount/errors.hpp"

namespace ctcount {

namespace {

using u128 = unsigned __int128;
using Key = u128;

struct Overflow {};

// Checked arithmetic for the 128-bit path; the BigInt overloads never throw.
inline void add_to(u128& a, const u128& b) {
  if (__builtin_add_overflow(a, b, &a)) throw Overflow{};
}
inline void add_to(BigInt& a, const BigInt& b) { a += b; }
inline u128 mul(const u128& a, const u128& b) {
  u128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw Overflow{};
  return r;
}
inline BigInt mul(const BigInt& a, const BigInt& b) { return a * b; }

BigInt to_big(const u128& v) {
  BigInt out = static_cast<std::uint64_t>(v >> 64);
  out <<= 64;
  out += static_cast<std::uint64_t>(v);
  return out;
}
BigInt to_big(const BigInt& v) { return v; }

template <class Count>
Count binomial(std::int64_t top, std::int64_t k) {
  if (k < 0 || top < k) return Count(0);
  Count r(1);
  for (std::int64_t i = 1; i <= k; ++i) {
    r = mul(r, Count(static_cast<std::uint64_t>(top - k + i)));
    r /= Count(static_cast<std::uint64_t>(i));
  }
  return r;
}

// Number of x with 0 <= x_i <= bounds[i] summing to total.
template <class Count>
Count compositions(std::int64_t total, const std::int64_t* bounds, int len) {
  if (total < 0) return Count(0);
  if (len <= 12) {
    // Inclusion-exclusion over the set of violated upper bounds.
    Count pos(0), neg(0);
    for (std::uint32_t subset = 0; subset < (1u << len); ++subset) {
      std::int64_t rest = total;
      int bits = 0;
      for (int i = 0; i < len; ++i)
        if (subset & (1u << i)) {
          rest -= bounds[i] + 1;
          ++bits;
        }
      if (rest < 0) continue;
      const Count term = binomial<Count>(rest + len - 1, len - 1);
      if (bits % 2 == 0) add_to(pos, term); else add_to(neg, term);
    }
    return pos - neg;
  }
  std::vector<Count> ways(static_cast<std::size_t>(total + 1), Count(0));
  std::vector<Count> prefix(static_cast<std::size_t>(total + 2), Count(0));
  ways[0] = Count(1);
  for (int i = 0; i < len; ++i) {
    prefix[0] = Count(0);
    for (std::int64_t t = 0; t <= total; ++t) {
      prefix[t + 1] = prefix[t];
      add_to(prefix[t + 1], ways[t]);
    }
    for (std::int64_t t = 0; t <= total; ++t) {
      const std::int64_t from = std::max<std::int64_t>(0, t - bounds[i]);
      ways[t] = prefix[t + 1] - prefix[from];
    }
  }
  return ways[total];
}

// Mixed-radix packing of (row remainders, budget). Every coordinate gets
// radix r_i + cmax + 1 so that a pass can shift coordinate i by up to cmax
// without leaving its digit.
struct Packing {
  std::vector<Key> mult;      // weight of coordinate i
  std::vector<Key> radix;
  Key budget_weight = 1;      // product of all radices

  std::int64_t digit(Key key, int i) const {
    return static_cast<std::int64_t>((key / mult[i]) % radix[i]);
  }
};

long double key_bits(const std::vector<std::int64_t>& rows, std::int64_t cmax) {
  long double bits = std::log2(static_cast<long double>(cmax + 1));
  for (auto r : rows) bits += std::log2(static_cast<long double>(r + cmax + 1));
  return bits;
}

Packing make_packing(const std::vector<std::int64_t>& rows, std::int64_t cmax) {
  Packing p;
  const int m = static_cast<int>(rows.size());
  p.mult.resize(m);
  p.radix.resize(m);
  if (key_bits(rows, cmax) > 126)
    throw BudgetExceeded(std::ldexp(1.0, 126), "DP state key does not fit in 128 bits");
  Key w = 1;
  for (int i = 0; i < m; ++i) {
    p.mult[i] = w;
    p.radix[i] = static_cast<Key>(rows[i] + cmax + 1);
    w *= p.radix[i];
  }
  p.budget_weight = w;
  return p;
}

template <class Count>
struct Entry {
  Key key;
  Count value;
};

template <class Count>
struct LineItem {
  Key line;
  std::int64_t budget;
  Count value;
};

// Applies one column with the given budget to a frontier of b = 0 states.
template <class Count>
std::vector<Entry<Count>> apply_column(std::vector<Entry<Count>> frontier, std::int64_t budget,
                                       const Packing& pk, int m, std::int64_t& explored) {
  const Key bw = pk.budget_weight;
  for (auto& e : frontier) e.key += static_cast<Key>(budget) * bw;

  std::vector<LineItem<Count>> items;
  for (int j = 0; j < m; ++j) {
    items.clear();
    items.reserve(frontier.size());
    for (auto& e : frontier) {
      const auto b = static_cast<std::int64_t>(e.key / bw);
      const Key coords = e.key % bw;
      items.push_back({coords + static_cast<Key>(budget - b) * pk.mult[j], b, std::move(e.value)});
    }
    frontier.clear();
    std::sort(items.begin(), items.end(), [](const LineItem<Count>& a, const LineItem<Count>& b) {
      return a.line != b.line ? a.line < b.line : a.budget > b.budget;
    });

    for (std::size_t start = 0; start < items.size();) {
      std::size_t stop = start;
      const Key line = items[start].line;
      while (stop < items.size() && items[stop].line == line) ++stop;

      // Along the line, row j holds (digit - budget) + b after the pass.
      const std::int64_t shifted = pk.digit(line, j);
      const std::int64_t lo = std::max<std::int64_t>(0, budget - shifted);
      std::int64_t cap = 0;
      for (int i = j + 1; i < m; ++i) cap += pk.digit(line, i);
      const std::int64_t hi = items[start].budget;

      Count running(0);
      std::size_t next = start;
      for (std::int64_t b = hi; b >= lo; --b) {
        while (next < stop && items[next].budget == b) {
          add_to(running, items[next].value);
          ++next;
        }
        if (b <= cap)
          frontier.push_back(
              {line - static_cast<Key>(budget - b) * pk.mult[j] + static_cast<Key>(b) * bw, running});
      }
      start = stop;
    }
    explored += static_cast<std::int64_t>(frontier.size());
  }
  return frontier;
}

template <class Count>
Count fold_column(const std::vector<Entry<Count>>& frontier, std::int64_t budget, const Packing& pk,
                  int m) {
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (frontier.size() + kChunk - 1) / kChunk;
  std::vector<Count> partial(chunks, Count(0));
  std::atomic<bool> overflowed{false};
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < chunks; ++c) {
    try {
      std::vector<std::int64_t> bounds(static_cast<std::size_t>(m));
      Count acc(0);
      const std::size_t end = std::min(frontier.size(), (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        for (int r = 0; r < m; ++r) bounds[r] = pk.digit(frontier[i].key, r);
        add_to(acc, mul(frontier[i].value, compositions<Count>(budget, bounds.data(), m)));
      }
      partial[c] = acc;
    } catch (const Overflow&) {
      overflowed = true;
    }
  }
  if (overflowed) throw Overflow{};
  Count total(0);
  for (const auto& p : partial) add_to(total, p);
  return total;
}

// Sum over the split a of the last four columns (p, q | u, v) with Σa = u + v:
// #(s - a; p, q) #(a; u, v), each a bounded composition count.
template <class Count>
Count split_fold(const std::vector<Entry<Count>>& frontier, std::int64_t p, std::int64_t u,
                 std::int64_t split_total, const Packing& pk, int m, std::int64_t& explored) {
  std::vector<Count> partial(frontier.size(), Count(0));
  std::vector<std::int64_t> visited(frontier.size(), 0);
  std::atomic<bool> overflowed{false};
#pragma omp parallel for schedule(dynamic)
  for (std::size_t f = 0; f < frontier.size(); ++f) {
    try {
      std::vector<std::int64_t> s(static_cast<std::size_t>(m)), a(static_cast<std::size_t>(m)),
          rest(static_cast<std::size_t>(m)), suffix(static_cast<std::size_t>(m + 1), 0);
      for (int r = 0; r < m; ++r) s[r] = pk.digit(frontier[f].key, r);
      for (int r = m - 1; r >= 0; --r) suffix[r] = suffix[r + 1] + s[r];
      Count acc(0);
      std::int64_t count = 0;
      // Odometer over a_0..a_{m-2}; a_{m-1} takes what is left.
      auto recurse = [&](auto& self, int r, std::int64_t left) -> void {
        if (r == m - 1) {
          if (left > s[r]) return;
          a[r] = left;
          ++count;
          for (int i = 0; i < m; ++i) rest[i] = s[i] - a[i];
          const Count right = compositions<Count>(u, a.data(), m);
          if (right == Count(0)) return;
          add_to(acc, mul(right, compositions<Count>(p, rest.data(), m)));
          return;
        }
        const std::int64_t lo = std::max<std::int64_t>(0, left - suffix[r + 1]);
        const std::int64_t hi = std::min(left, s[r]);
        for (std::int64_t x = lo; x <= hi; ++x) {
          a[r] = x;
          self(self, r + 1, left - x);
        }
      };
      recurse(recurse, 0, split_total);
      partial[f] = mul(acc, frontier[f].value);
      visited[f] = count;
    } catch (const Overflow&) {
      overflowed = true;
    }
  }
  if (overflowed) throw Overflow{};
  Count total(0);
  for (std::size_t f = 0; f < frontier.size(); ++f) {
    add_to(total, partial[f]);
    explored += visited[f];
  }
  return total;
}

template <class Count>
ExactCount run_dp(const std::vector<std::int64_t>& rows, std::vector<std::int64_t> cols, DpPlan plan) {
  ExactCount out;
  out.method = ExactCount::Method::Dp;
  const int m = static_cast<int>(rows.size());
  std::sort(cols.begin(), cols.end());
  if (cols.size() == 1) {
    out.value = 1;
    out.states_explored = 1;
    return out;
  }
  const Packing pk = make_packing(rows, cols.back());

  Key start = 0;
  for (int i = 0; i < m; ++i) start += static_cast<Key>(rows[i]) * pk.mult[i];
  std::vector<Entry<Count>> frontier{{start, Count(1)}};
  std::int64_t explored = 1;
  const std::size_t n = cols.size();
  const std::size_t applied = plan == DpPlan::Split ? n - 4 : n - 2;
  for (std::size_t c = 0; c < applied; ++c)
    frontier = apply_column(std::move(frontier), cols[c], pk, m, explored);
  Count total;
  if (plan == DpPlan::Split)
    total = split_fold(frontier, cols[n - 4], cols[n - 2], cols[n - 2] + cols[n - 1], pk, m, explored);
  else
    total = fold_column(frontier, cols[n - 2], pk, m);
  out.value = to_big(total);
  out.states_explored = explored;
  return out;
}

// Number of x <= bounds with sum s, for every s, in floating point.
std::vector<double> slice_sizes(const std::vector<std::int64_t>& bounds, std::int64_t total) {
  std::vector<double> ways(static_cast<std::size_t>(total + 1), 0.0);
  std::vector<double> prefix(static_cast<std::size_t>(total + 2), 0.0);
  ways[0] = 1;
  for (std::int64_t u : bounds) {
    for (std::int64_t t = 0; t <= total; ++t) prefix[t + 1] = prefix[t] + ways[t];
    for (std::int64_t t = 0; t <= total; ++t)
      ways[t] = prefix[t + 1] - prefix[std::max<std::int64_t>(0, t - u)];
  }
  return ways;
}

}  // namespace

BigInt bounded_compositions(std::int64_t total, const std::vector<std::int64_t>& bounds) {
  return compositions<BigInt>(total, bounds.data(), static_cast<int>(bounds.size()));
}

namespace {

struct PlanCost {
  DpPlan plan;
  double cost;
};

// Cost of the requested plan, or of the cheaper one when none is given.
PlanCost plan_cost(const Margins& margins, std::optional<DpPlan> want = std::nullopt) {
  std::vector<std::int64_t> cols = margins.cols();
  std::sort(cols.begin(), cols.end());
  const std::size_t n = cols.size();
  if (n > 1 && key_bits(margins.rows(), cols.back()) > 126) return {DpPlan::Sweep, HUGE_VAL};
  if (n < 3) return {DpPlan::Sweep, 1.0};
  const auto slices = slice_sizes(margins.rows(), margins.total());
  // Intermediate passes hold at most (budget + 1) entries per frontier state.
  auto sweep = [&](std::size_t upto, double& frontier) {
    double estimate = 1.0;
    frontier = 1.0;
    std::int64_t remaining = margins.total();
    for (std::size_t c = 0; c < upto; ++c) {
      estimate += slices[static_cast<std::size_t>(remaining)] * static_cast<double>(cols[c] + 1);
      remaining -= cols[c];
      frontier = slices[static_cast<std::size_t>(remaining)];
      estimate += frontier;
    }
    return estimate;
  };
  double frontier = 1.0;
  const double sweep_cost = sweep(n - 2, frontier);
  if (n < 4 || want == DpPlan::Sweep) return {DpPlan::Sweep, sweep_cost};
  double split_cost = sweep(n - 4, frontier);
  // Each split is bounded by the box slice of the full row sums.
  split_cost += frontier * slices[static_cast<std::size_t>(cols[n - 2] + cols[n - 1])];
  if (want == DpPlan::Split || split_cost < sweep_cost) return {DpPlan::Split, split_cost};
  return {DpPlan::Sweep, sweep_cost};
}

}  // namespace

double dp_state_estimate(const Margins& margins) { return plan_cost(margins).cost; }

ExactCount exact_count(const Margins& margins, const ExactConfig& cfg) {
  const Margins* use = &margins;
  Margins flipped = margins.transposed();
  PlanCost best = plan_cost(margins, cfg.plan);
  if (cfg.auto_orient) {
    const PlanCost other = plan_cost(flipped, cfg.plan);
    if (other.cost < best.cost) {
      use = &flipped;
      best = other;
    }
  }
  const double estimate = best.cost;
  if (!std::isfinite(estimate))
    throw BudgetExceeded(estimate, "DP state key does not fit in 128 bits in either orientation");
  if (estimate > cfg.state_budget)
    throw BudgetExceeded(estimate, "estimated DP frontier of " + std::to_string(estimate) +
                                       " entries exceeds the state budget");
  if (!cfg.force_bigint) {
    try {
      return run_dp<u128>(use->rows(), use->cols(), best.plan);
    } catch (const Overflow&) {
    }
  }
  ExactCount out = run_dp<BigInt>(use->rows(), use->cols(), best.plan);
  out.used_bigint = true;
  return out;
}

namespace {

struct BruteState {
  const std::vector<std::int64_t>* rows;
  std::vector<std::int64_t> cols_left;
  std::int64_t visited = 0;
  std::uint64_t count = 0;
};

// Places row j one cell at a time; cell k of row j takes any value up to
// what is left in the row and in column k.
void brute_row(BruteState& st, int j, int k, std::int64_t row_left) {
  const int m = static_cast<int>(st.rows->size());
  const int n = static_cast<int>(st.cols_left.size());
  ++st.visited;
  if (k == n) {
    if (row_left != 0) return;
    if (j + 1 == m) {
      if (std::all_of(st.cols_left.begin(), st.cols_left.end(), [](std::int64_t c) { return c == 0; }))
        ++st.count;
      return;
    }
    brute_row(st, j + 1, 0, (*st.rows)[j + 1]);
    return;
  }
  const std::int64_t top = std::min(row_left, st.cols_left[k]);
  for (std::int64_t x = 0; x <= top; ++x) {
    st.cols_left[k] -= x;
    brute_row(st, j, k + 1, row_left - x);
    st.cols_left[k] += x;
  }
}

}  // namespace

ExactCount brute_enumerate(const Margins& margins, double max_product, double max_leaves) {
  double product = 1;
  for (auto r : margins.rows()) product *= static_cast<double>(r + 1);
  if (product > max_product)
    throw BudgetExceeded(product, "brute-force enumeration is too large");
  // Leaves of the search tree are bounded by the row-wise compositions.
  const double parts = static_cast<double>(margins.n() - 1);
  double leaves = 1;
  for (auto r : margins.rows())
    leaves *= std::exp(std::lgamma(static_cast<double>(r) + parts + 1) - std::lgamma(static_cast<double>(r) + 1) -
                       std::lgamma(parts + 1));
  if (leaves > max_leaves)
    throw BudgetExceeded(leaves, "brute-force enumeration is too large");
  BruteState st{&margins.rows(), margins.cols()};
  brute_row(st, 0, 0, margins.rows()[0]);
  ExactCount out;
  out.method = ExactCount::Method::Brute;
  out.value = st.count;
  out.states_explored = st.visited;
  return out;
}

std::string exact_to_json(const ExactCount& count) {
  nlohmann::json j;
  j["schema"] = 1;
  j["count"] = count.value.str();
  j["method"] = count.method == ExactCount::Method::Dp ? "dp" : "brute";
  j["states_explored"] = count.states_explored;
  j["arbitrary_precision"] = count.used_bigint;
  return j.dump();
}

}  // namespace ctcount
