#pragma once

// Text formats: headered numeric CSV input, the long-format Diff grid CSV
// and the regression coefficient table.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "factor_risk/core.hpp"
#include "factor_risk/factor_model.hpp"

namespace factor_risk {

/// Column-addressable numeric table.
struct CsvTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j)
      if (names[j] == name) return columns[j];
    throw DataError("missing column '" + name + "'");
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool parse_double(std::string_view cell, double& out) {
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end;
}

/// "%.9g", with "nan" for NaN.
inline std::string format_g9(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace detail

/// Parses a comma-separated file with a header row and '.' decimals.
/// Columns named in `skip` (e.g. a date column) are not parsed. Errors name
/// the 1-based file row and the column.
inline CsvTable read_csv(std::istream& in, const std::vector<std::string>& skip = {}) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header;
  for (const auto cell : detail::split_commas(line)) header.emplace_back(cell);
  CsvTable table;
  std::vector<int> slot(header.size(), -1);
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& name = header[j];
    if (name.empty()) throw DataError("CSV header: empty column name at position " + std::to_string(j + 1));
    for (const auto& existing : table.names)
      if (existing == name) throw DataError("CSV header: duplicate column '" + name + "'");
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    slot[j] = static_cast<int>(table.names.size());
    table.names.push_back(name);
  }
  table.columns.resize(table.names.size());

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != header.size())
      throw DataError("CSV row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (slot[j] < 0) continue;
      double v = 0.0;
      if (!detail::parse_double(cells[j], v) || !std::isfinite(v))
        throw DataError("CSV row " + std::to_string(row) + ", column " + header[j] +
                        ": not a number ('" + std::string(cells[j]) + "')");
      table.columns[static_cast<std::size_t>(slot[j])].push_back(v);
    }
  }
  if (table.rows() == 0) throw DataError("CSV input has no data rows");
  return table;
}

inline CsvTable read_csv(const std::string& path, const std::vector<std::string>& skip = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, skip);
}

/// Sample with the target column as loss and the named factor columns.
inline JointSample make_sample(const CsvTable& table, const std::string& target,
                               const std::vector<std::string>& factors) {
  if (factors.empty()) throw DataError("no factor columns selected");
  const auto& loss = table.column(target);
  std::vector<const std::vector<double>*> cols;
  for (const auto& f : factors) cols.push_back(&table.column(f));
  std::vector<double> flat;
  flat.reserve(loss.size() * factors.size());
  for (std::size_t t = 0; t < loss.size(); ++t)
    for (const auto* c : cols) flat.push_back((*c)[t]);
  return JointSample(loss, std::move(flat), factors.size());
}

inline constexpr std::string_view kGridHeader = "p,q,rho_factor,rho_plain,diff";

inline void write_grid(std::ostream& out, const DiffGrid& grid) {
  out << kGridHeader << '\n';
  for (const auto& c : grid.rows)
    out << detail::format_g9(c.p) << ',' << detail::format_g9(c.q) << ',' << detail::format_g9(c.rho_factor) << ','
        << detail::format_g9(c.rho_plain) << ',' << detail::format_g9(c.diff) << '\n';
}

inline DiffGrid read_grid(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != kGridHeader)
    throw DataError("grid CSV: expected header '" + std::string(kGridHeader) + "'");
  DiffGrid grid;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    if (cells.size() != 5) throw DataError("grid CSV row " + std::to_string(row) + ": expected 5 cells");
    double v[5];
    for (std::size_t j = 0; j < 5; ++j) {
      if (cells[j] == "nan") {
        v[j] = std::numeric_limits<double>::quiet_NaN();
      } else if (!detail::parse_double(cells[j], v[j])) {
        throw DataError("grid CSV row " + std::to_string(row) + ": not a number");
      }
    }
    grid.rows.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return grid;
}

namespace detail {

// coefficient-table number formats: 4 digits for coefficients, 3 elsewhere,
// switching to %g outside [1e-4, 1e4)
inline std::string forg(double x, int prec) {
  char buf[48];
  const bool general = std::abs(x) >= 1e4 || std::abs(x) < 1e-4;
  if (std::isnan(x)) {
    std::snprintf(buf, sizeof buf, "%*s", prec == 4 ? 10 : 9, "nan");
  } else if (prec == 4) {
    std::snprintf(buf, sizeof buf, general ? "%10.4g" : "%10.4f", x);
  } else {
    std::snprintf(buf, sizeof buf, general ? "%9.3g" : "%9.3f", x);
  }
  return buf;
}

}  // namespace detail

/// Regression coefficient table with columns
/// coef, std err, t, P>|t|, [0.025, 0.975].
inline std::string format_regression_table(const RegressionFit& fit) {
  std::size_t width = 5;
  for (const auto& n : fit.names) width = std::max(width, n.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %10s %10s %10s\n", static_cast<int>(width), "", "coef",
                "std err", "t", "P>|t|", "[0.025", "0.975]");
  out << buf;
  out << std::string(width + 6 * 11, '-') << '\n';
  for (std::size_t k = 0; k < fit.names.size(); ++k) {
    char pv[32];
    if (std::isnan(fit.pvalue[k])) {
      std::snprintf(pv, sizeof pv, "%s", "nan");
    } else {
      std::snprintf(pv, sizeof pv, "%#6.3f", fit.pvalue[k]);
    }
    std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %10s %10s %10s\n", static_cast<int>(width),
                  fit.names[k].c_str(), detail::forg(fit.coef(k), 4).c_str(), detail::forg(fit.std_err[k], 3).c_str(),
                  detail::forg(fit.tstat[k], 3).c_str(), pv, detail::forg(fit.ci95[k].first, 3).c_str(),
                  detail::forg(fit.ci95[k].second, 3).c_str());
    out << buf;
  }
  return out.str();
}

/// Same table as CSV with header "name,coef,std err,t,P>|t|,0.025,0.975".
inline std::string format_regression_csv(const RegressionFit& fit) {
  std::ostringstream out;
  out << "name,coef,std err,t,P>|t|,0.025,0.975\n";
  for (std::size_t k = 0; k < fit.names.size(); ++k)
    out << fit.names[k] << ',' << detail::format_g9(fit.coef(k)) << ',' << detail::format_g9(fit.std_err[k]) << ','
        << detail::format_g9(fit.tstat[k]) << ',' << detail::format_g9(fit.pvalue[k]) << ','
        << detail::format_g9(fit.ci95[k].first) << ',' << detail::format_g9(fit.ci95[k].second) << '\n';
  return out.str();
}

}  // namespace factor_risk
