#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace asrh::store {

struct StatsSummary {
  std::string group_key;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double median = 0.0;         // mean of the middle pair for even counts
  double std_deviation = 0.0;  // sample (n - 1) form; 0 when count == 1
  double variance = 0.0;       // std_deviation squared
  std::size_t count = 0;
};

/// Throws Error{EmptySelection} when `values` is empty.
StatsSummary summarize_values(std::string group_key, std::vector<double> values);

enum class TableFormat { Csv, Text };

/// Columns Min, Max, Mean, Std. deviation, Variance, Median, Group with
/// numbers at 6 significant digits. CSV follows RFC 4180 (CRLF line ends);
/// text is column-aligned. Rows appear in the given order.
std::string export_table(const std::vector<StatsSummary>& summaries, TableFormat format);

/// "%.6g" without locale influence.
std::string format_number(double v);

}  // namespace asrh::store
