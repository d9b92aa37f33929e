#include "asrh/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "asrh/error.hpp"

namespace asrh::store {
namespace {

/// Neumaier-compensated sum.
double accurate_sum(const std::vector<double>& xs, double shift = 0.0, bool square = false) {
  double sum = 0.0, c = 0.0;
  for (double x : xs) {
    double v = x - shift;
    if (square) v *= v;
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

constexpr std::array<const char*, 7> kHeader = {"Min", "Max", "Mean", "Std. deviation", "Variance", "Median", "Group"};

std::array<std::string, 7> cells(const StatsSummary& s) {
  return {format_number(s.min), format_number(s.max),      format_number(s.mean), format_number(s.std_deviation),
          format_number(s.variance), format_number(s.median), s.group_key};
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

StatsSummary summarize_values(std::string group_key, std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySelection, "no values in group '" + group_key + "'");
  StatsSummary s;
  s.group_key = std::move(group_key);
  s.count = values.size();
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  const std::size_t n = values.size();
  s.median = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
  s.mean = accurate_sum(values) / static_cast<double>(n);
  s.variance = n > 1 ? accurate_sum(values, s.mean, true) / static_cast<double>(n - 1) : 0.0;
  s.std_deviation = std::sqrt(s.variance);
  return s;
}

std::string export_table(const std::vector<StatsSummary>& summaries, TableFormat format) {
  std::vector<std::array<std::string, 7>> rows;
  rows.reserve(summaries.size() + 1);
  rows.push_back({});
  for (std::size_t i = 0; i < kHeader.size(); ++i) rows[0][i] = kHeader[i];
  for (const auto& s : summaries) rows.push_back(cells(s));

  std::string out;
  if (format == TableFormat::Csv) {
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_field(r[i]);
      out += "\r\n";
    }
    return out;
  }
  std::array<std::size_t, 7> width{};
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      line += std::string(width[i] - r[i].size(), ' ') + r[i] + "  ";
    }
    line += r.back();
    out += line + "\n";
  }
  return out;
}

}  // namespace asrh::store
