#pragma once

#include <optional>
#include <string>
#include <vector>

namespace uerw {

// Deterministic grouped-bar SVG chart; missing values skip the bar and
// print "n/a" under the group instead.
struct BarSeries {
  std::string label;
  std::string color;  // CSS color
  std::vector<std::optional<double>> values;  // one per category
};

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& categories,
                         const std::vector<BarSeries>& series, const std::string& y_label,
                         double y_max = 100.0);

}  // namespace uerw
