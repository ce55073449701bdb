#include "ctcount/margins.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "ctcount/errors.hpp"

namespace ctcount {

Margins Margins::transposed() const { return Margins(cols_, rows_, total_); }

Margins validate_margins(std::vector<std::int64_t> rows, std::vector<std::int64_t> cols) {
  if (rows.empty() || cols.empty())
    throw Error(ErrorKind::InvalidArgument, "margins must have at least one row and one column");
  auto positive = [](std::int64_t v) { return v >= 1; };
  if (!std::all_of(rows.begin(), rows.end(), positive) ||
      !std::all_of(cols.begin(), cols.end(), positive))
    throw Error(ErrorKind::NonPositive, "every margin entry must be >= 1");
  const std::int64_t row_total = std::accumulate(rows.begin(), rows.end(), std::int64_t{0});
  const std::int64_t col_total = std::accumulate(cols.begin(), cols.end(), std::int64_t{0});
  if (row_total != col_total) {
    std::ostringstream os;
    os << "row total " << row_total << " differs from column total " << col_total;
    throw Error(ErrorKind::SumMismatch, os.str());
  }
  return Margins(std::move(rows), std::move(cols), row_total);
}

namespace {

std::vector<std::int64_t> apportion(const std::vector<std::int64_t>& side, double alpha,
                                    std::int64_t target) {
  const std::size_t len = side.size();
  if (static_cast<std::int64_t>(len) > target)
    throw Error(ErrorKind::Infeasible,
                "scaled total is smaller than the number of entries on one side");

  std::vector<std::int64_t> out(len);
  std::vector<double> frac(len);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const double scaled = alpha * static_cast<double>(side[i]);
    const double fl = std::floor(scaled);
    out[i] = static_cast<std::int64_t>(fl);
    frac[i] = scaled - fl;
    assigned += out[i];
  }

  std::vector<std::size_t> order(len);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  // 0 <= deficit <= len up to floating-point noise in the floors.
  std::int64_t deficit = target - assigned;
  for (std::size_t i = 0; deficit > 0; i = (i + 1) % len, --deficit) out[order[i]] += 1;
  for (; deficit < 0; ++deficit) {
    auto largest = std::max_element(out.begin(), out.end());
    *largest -= 1;
  }

  for (std::size_t i = 0; i < len; ++i) {
    if (out[i] >= 1) continue;
    out[i] = 1;
    auto largest = std::max_element(out.begin(), out.end());
    *largest -= 1;
  }
  return out;
}

}  // namespace

Margins scale_and_round(const Margins& margins, double alpha) {
  if (!(alpha > 0) || !std::isfinite(alpha))
    throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  const auto target =
      static_cast<std::int64_t>(std::llround(alpha * static_cast<double>(margins.total())));
  auto rows = apportion(margins.rows(), alpha, target);
  auto cols = apportion(margins.cols(), alpha, target);
  return validate_margins(std::move(rows), std::move(cols));
}

double SmoothnessReport::delta() const {
  return std::min({zeta_ratio, dim_ratio, tau, 1.0});
}

SmoothnessReport smoothness_report(const Margins& margins, const Matrix& zeta) {
  SmoothnessReport rep;
  const double m = margins.m();
  const double n = margins.n();
  rep.tau = zeta.maxCoeff();
  rep.zeta_ratio = zeta.minCoeff() / rep.tau;
  rep.dim_ratio = std::min(m / n, n / m);
  rep.density = static_cast<double>(margins.total()) / (m * n);
  auto [rmin, rmax] = std::minmax_element(margins.rows().begin(), margins.rows().end());
  auto [cmin, cmax] = std::minmax_element(margins.cols().begin(), margins.cols().end());
  rep.row_ratio = static_cast<double>(*rmax) / static_cast<double>(*rmin);
  rep.col_ratio = static_cast<double>(*cmax) / static_cast<double>(*cmin);
  rep.golden_ratio_guarantee = rep.row_ratio < kGoldenRatio && rep.col_ratio < kGoldenRatio;
  return rep;
}

namespace {

std::vector<std::int64_t> integer_array(const nlohmann::json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_array())
    throw Error(ErrorKind::Parse, std::string("missing array field \"") + name + "\"");
  std::vector<std::int64_t> out;
  for (const auto& v : j.at(name)) {
    if (!v.is_number_integer())
      throw Error(ErrorKind::Parse, std::string("non-integer entry in \"") + name + "\"");
    out.push_back(v.get<std::int64_t>());
  }
  return out;
}

std::vector<std::int64_t> csv_line(const std::string& line) {
  std::vector<std::int64_t> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    if (first == std::string::npos) throw Error(ErrorKind::Parse, "empty CSV cell");
    const std::string trimmed = cell.substr(first, last - first + 1);
    std::size_t used = 0;
    std::int64_t value = 0;
    try {
      value = std::stoll(trimmed, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "bad CSV integer \"" + trimmed + "\"");
    }
    if (used != trimmed.size()) throw Error(ErrorKind::Parse, "bad CSV integer \"" + trimmed + "\"");
    out.push_back(value);
  }
  return out;
}

}  // namespace

Margins parse_margins_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Parse, "margins JSON must be an object");
  return validate_margins(integer_array(j, "rows"), integer_array(j, "cols"));
}

Margins parse_margins_csv(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  if (lines.size() != 2) throw Error(ErrorKind::Parse, "CSV margins need exactly two lines");
  return validate_margins(csv_line(lines[0]), csv_line(lines[1]));
}

Margins parse_margins(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_margins_json(text);
  return parse_margins_csv(text);
}

Margins read_margins(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return parse_margins(text);
}

std::string margins_to_json(const Margins& margins) {
  nlohmann::json j;
  j["rows"] = margins.rows();
  j["cols"] = margins.cols();
  return j.dump();
}

}  // namespace ctcount
