#pragma once

#include <string>
#include <vector>

namespace mbrl {

struct Series {
  std::string name;
  std::vector<double> ys;
};

/// Minimal SVG line chart. Non-finite points (and non-positive ones on a log
/// axis) are skipped. Output depends only on the arguments.
std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::vector<double>& xs, const std::vector<Series>& series,
                          bool log_y, bool log_x = false);

/// CSV with a header row; numbers printed with 17 significant digits,
/// non-finite values as "inf", "-inf" or "nan".
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

/// Shortest round-trip formatting used by every CSV writer.
std::string format_number(double x);

}  // namespace mbrl
