// Serial reference versus OpenMP kernels on fixed instances.
#include <benchmark/benchmark.h>

#include "ctcount/edgeworth.hpp"
#include "ctcount/gaussian.hpp"
#include "ctcount/oracle.hpp"
#include "ctcount/typical.hpp"

using namespace ctcount;

namespace {

struct Instance {
  Margins margins;
  TypicalSolution sol;
  QuadraticModel model;
};

Instance square(int n, std::int64_t density) {
  std::vector<std::int64_t> rows(static_cast<std::size_t>(n)), cols(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rows[i] = density * n + i;
    cols[i] = density * n + (n - 1 - i);
  }
  Margins mg = validate_margins(rows, cols);
  TypicalSolution sol = solve_typical(mg);
  QuadraticModel model = build_quadratic(sol.Z.zeta, mg);
  return {mg, sol, model};
}

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void BM_mu_term(benchmark::State& state) {
  static const Instance inst = square(30, 4);
  const Exec exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(mu_term(inst.sol.Z.zeta, inst.model, exec));
  state.SetLabel(exec == Exec::Serial ? "serial" : "parallel");
}

void BM_integral_count(benchmark::State& state) {
  static const Instance inst = [] {
    Margins mg = validate_margins({7, 6, 5}, {6, 6, 6});
    TypicalSolution sol = solve_typical(mg);
    return Instance{mg, sol, build_quadratic(sol.Z.zeta, mg)};
  }();
  QuadratureConfig cfg;
  cfg.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(integral_count(inst.sol, inst.margins, cfg).estimate);
  state.SetLabel(cfg.exec == Exec::Serial ? "serial" : "parallel");
}

void BM_mc_expectations(benchmark::State& state) {
  static const Instance inst = square(8, 3);
  const Exec exec = exec_of(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(mc_expectations(inst.model, inst.sol.Z.zeta, 50000, 42, exec).mu_hat);
  state.SetLabel(exec == Exec::Serial ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_mu_term)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_integral_count)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_expectations)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
