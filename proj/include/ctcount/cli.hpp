#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ctcount {

struct RunConfig {
  double tol = 1e-10;
  std::int64_t max_iter = 10000;
  int grid = 0;  // 0: per-axis automatic grid
  std::int64_t samples = 1000000;
  std::uint64_t seed = 42;
  double state_budget = 2e8;
  std::string format = "json";  // json | text
  int threads = 0;              // 0: OpenMP default
};

/// Entry point of the command-line tool. Writes reports to out and JSON
/// error objects to err. Returns 0 on success, 1 on input errors and 2 on
/// computational failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctcount
