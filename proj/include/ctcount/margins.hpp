#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ctcount {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row and column sums of an m x n table sharing a common total N.
/// Only constructible through validate_margins, so every instance satisfies
/// sum(rows) == sum(cols) == total with all entries >= 1.
class Margins {
 public:
  const std::vector<std::int64_t>& rows() const noexcept { return rows_; }
  const std::vector<std::int64_t>& cols() const noexcept { return cols_; }
  std::int64_t total() const noexcept { return total_; }
  int m() const noexcept { return static_cast<int>(rows_.size()); }
  int n() const noexcept { return static_cast<int>(cols_.size()); }

  /// Margins of the transposed table.
  Margins transposed() const;

  bool operator==(const Margins&) const = default;

 private:
  friend Margins validate_margins(std::vector<std::int64_t>, std::vector<std::int64_t>);
  Margins(std::vector<std::int64_t> rows, std::vector<std::int64_t> cols, std::int64_t total)
      : rows_(std::move(rows)), cols_(std::move(cols)), total_(total) {}

  std::vector<std::int64_t> rows_;
  std::vector<std::int64_t> cols_;
  std::int64_t total_ = 0;
};

/// Throws InvalidArgument on empty input, NonPositive on entries < 1 and
/// SumMismatch when the two totals differ.
Margins validate_margins(std::vector<std::int64_t> rows, std::vector<std::int64_t> cols);

/// Scales both sides by alpha and rounds back to integers.
///
/// The target total is round(alpha * N). Each side is floored entrywise and
/// the deficit is handed out one unit at a time to the entries with the
/// largest fractional part (lowest index wins ties). Entries that end up at
/// zero are raised to one, taking the unit from the current largest entry.
/// Throws Infeasible when a side has more entries than the target total.
Margins scale_and_round(const Margins& margins, double alpha);

struct SmoothnessReport {
  double tau = 0;          // max zeta
  double zeta_ratio = 0;   // min zeta / max zeta
  double dim_ratio = 0;    // min(m/n, n/m)
  double density = 0;      // N / (m n)
  double row_ratio = 0;    // max r / min r
  double col_ratio = 0;    // max c / min c
  bool golden_ratio_guarantee = false;

  /// Largest delta for which the margins are delta-smooth (given tau >= delta).
  double delta() const;
};

inline constexpr double kGoldenRatio = 1.6180339887498949;

/// Diagnostic only; never throws for a well-formed zeta.
SmoothnessReport smoothness_report(const Margins& margins, const Matrix& zeta);

// I/O. The JSON shape is {"rows":[...], "cols":[...]}; the CSV shape is two
// lines of comma-separated integers, rows first.
Margins parse_margins_json(const std::string& text);
Margins parse_margins_csv(const std::string& text);
/// Sniffs the format: a leading '{' means JSON, anything else CSV.
Margins parse_margins(const std::string& text);
/// Reads from a file path, or stdin when path is "-". Throws Io on failure.
Margins read_margins(const std::string& path);
std::string margins_to_json(const Margins& margins);

}  // namespace ctcount
