#include "ctcount/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "ctcount/edgeworth.hpp"
#include "ctcount/errors.hpp"
#include "ctcount/gaussian.hpp"
#include "ctcount/margins.hpp"
#include "ctcount/oracle.hpp"
#include "ctcount/typical.hpp"

namespace ctcount {

namespace {

using nlohmann::json;

json margins_json(const Margins& mg) { return {{"rows", mg.rows()}, {"cols", mg.cols()}}; }

json smoothness_json(const SmoothnessReport& s) {
  return {{"tau", s.tau},
          {"zeta_ratio", s.zeta_ratio},
          {"dim_ratio", s.dim_ratio},
          {"density", s.density},
          {"row_ratio", s.row_ratio},
          {"col_ratio", s.col_ratio},
          {"golden_ratio_guarantee", s.golden_ratio_guarantee}};
}

// ln of a non-negative big integer without overflowing double.
double log_big(const BigInt& v) {
  if (v <= 0) return -HUGE_VAL;
  const auto bits = static_cast<long>(boost::multiprecision::msb(v));
  if (bits < 900) return std::log(v.convert_to<double>());
  const long drop = bits - 60;
  const BigInt top = v >> drop;
  return std::log(top.convert_to<double>()) + static_cast<double>(drop) * std::log(2.0);
}

double rel_error_log(double log_estimate, double log_exact) {
  return std::abs(std::expm1(log_estimate - log_exact));
}

TypicalConfig typical_cfg(const RunConfig& rc) {
  TypicalConfig cfg;
  cfg.tol = rc.tol;
  cfg.max_iter = rc.max_iter;
  return cfg;
}

json estimate_report(const Margins& mg, const RunConfig& rc) {
  const TypicalSolution sol = solve_typical(mg, typical_cfg(rc));
  const CountEstimate est = estimate_from_solution(sol, mg);
  json j = json::parse(estimate_to_json(est));
  j["margins"] = margins_json(mg);
  j["smoothness"] = smoothness_json(smoothness_report(mg, sol.Z.zeta));
  return j;
}

json exact_report(const Margins& mg, const RunConfig& rc) {
  ExactConfig cfg;
  cfg.state_budget = rc.state_budget;
  json j = json::parse(exact_to_json(exact_count(mg, cfg)));
  j["margins"] = margins_json(mg);
  return j;
}

json quadrature_json(const QuadratureResult& q) {
  return {{"real_part", q.real_part},
          {"imag_part", q.imag_part},
          {"grid_points_per_axis", q.grid_points_per_axis},
          {"transposed", q.transposed},
          {"estimate", q.estimate}};
}

json sample_json(const GeometricMcResult& r) {
  return {{"estimate", r.estimate},
          {"std_error", r.std_error},
          {"hits", r.hits},
          {"samples", r.samples}};
}

json check_report(const Margins& mg, const RunConfig& rc) {
  json j;
  j["schema"] = 1;
  j["margins"] = margins_json(mg);
  const TypicalSolution sol = solve_typical(mg, typical_cfg(rc));
  const CountEstimate est = estimate_from_solution(sol, mg);
  j["estimate"] = json::parse(estimate_to_json(est));

  std::optional<double> log_exact;
  try {
    ExactConfig cfg;
    cfg.state_budget = rc.state_budget;
    const ExactCount ex = exact_count(mg, cfg);
    j["exact"] = json::parse(exact_to_json(ex));
    log_exact = log_big(ex.value);
  } catch (const BudgetExceeded& e) {
    j["exact"] = {{"skipped", "budget_exceeded"}, {"states_estimate", e.states_estimate()}};
  }

  try {
    const ExactCount br = brute_enumerate(mg);
    j["brute"] = json::parse(exact_to_json(br));
  } catch (const BudgetExceeded&) {
    j["brute"] = {{"skipped", "budget_exceeded"}};
  }

  std::optional<double> quad;
  try {
    QuadratureConfig qc;
    qc.grid = rc.grid;
    qc.max_work = 2e8;
    const QuadratureResult q = integral_count(sol, mg, qc);
    j["integral"] = quadrature_json(q);
    quad = q.estimate;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DimensionTooLarge && e.kind() != ErrorKind::BudgetExceeded) throw;
    j["integral"] = {{"skipped", to_string(e.kind())}};
  }

  const GeometricMcResult mc = geometric_mc_count(sol, mg, rc.samples, rc.seed);
  j["sample"] = sample_json(mc);

  json rel = json::object();
  if (log_exact) {
    rel["gaussian"] = rel_error_log(est.gaussian_log, *log_exact);
    rel["edgeworth"] = rel_error_log(est.log_count, *log_exact);
    if (quad && *quad > 0) rel["integral"] = rel_error_log(std::log(*quad), *log_exact);
    rel["sample"] = mc.hits > 0 ? rel_error_log(std::log(mc.estimate), *log_exact) : 1.0;
  }
  j["relative_errors"] = rel;
  return j;
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& rows) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), rows);
  } else if (j.is_string()) {
    rows.emplace_back(prefix, j.get<std::string>());
  } else {
    rows.emplace_back(prefix, j.dump());
  }
}

void render(const json& j, const RunConfig& rc, std::ostream& out) {
  if (rc.format == "text") {
    std::vector<std::pair<std::string, std::string>> rows;
    flatten(j, "", rows);
    std::size_t width = 0;
    for (const auto& [k, v] : rows) width = std::max(width, k.size());
    for (const auto& [k, v] : rows) out << std::left << std::setw(static_cast<int>(width) + 2) << k << v << '\n';
  } else {
    out << j.dump() << '\n';
  }
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Asymptotic and exact counts of non-negative integer tables with given margins",
               "ctcount"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--tol", rc.tol, "relative margin tolerance of the typical matrix")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-iter", rc.max_iter, "solver sweep limit")->check(CLI::PositiveNumber);
  app.add_option("--grid", rc.grid, "quadrature points per axis (0: automatic)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--samples", rc.samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
  app.add_option("--seed", rc.seed, "Monte Carlo seed");
  app.add_option("--state-budget", rc.state_budget, "DP frontier limit")->check(CLI::PositiveNumber);
  app.add_option("--format", rc.format, "output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--threads", rc.threads, "worker threads (0: auto)")->check(CLI::NonNegativeNumber);

  std::string path;
  double alpha = 1.0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"estimate", "asymptotic count with Gaussian and Edgeworth terms"},
      {"exact", "exact count by dynamic programming"},
      {"typical", "typical matrix and dual potentials"},
      {"integral", "characteristic-function quadrature (m + n <= 6)"},
      {"sample", "geometric Monte Carlo hit counting"},
      {"check", "estimate plus every applicable oracle"},
      {"scale", "scale margins by alpha and round"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("margins", path, "margins file (JSON or CSV), '-' for stdin")->required();
    if (name == "scale") sub->add_option("--alpha", alpha, "scale factor")->required();
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return 1;
  }

#ifdef _OPENMP
  if (rc.threads > 0) omp_set_num_threads(rc.threads);
#endif

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const Margins mg = read_margins(path);
    json report;
    if (cmd == "estimate") {
      report = estimate_report(mg, rc);
    } else if (cmd == "exact") {
      report = exact_report(mg, rc);
    } else if (cmd == "typical") {
      report = json::parse(typical_to_json(solve_typical(mg, typical_cfg(rc))));
    } else if (cmd == "integral") {
      const TypicalSolution sol = solve_typical(mg, typical_cfg(rc));
      QuadratureConfig qc;
      qc.grid = rc.grid;
      report = quadrature_json(integral_count(sol, mg, qc));
      report["schema"] = 1;
    } else if (cmd == "sample") {
      const TypicalSolution sol = solve_typical(mg, typical_cfg(rc));
      report = sample_json(geometric_mc_count(sol, mg, rc.samples, rc.seed));
      report["schema"] = 1;
      report["seed"] = rc.seed;
    } else if (cmd == "check") {
      report = check_report(mg, rc);
    } else {
      // Same shape as the input JSON, no envelope.
      report = margins_json(scale_and_round(mg, alpha));
    }
    render(report, rc, out);
    return 0;
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.what());
    return is_input_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    report_error(err, "internal", e.what());
    return 2;
  }
}

}  // namespace ctcount
