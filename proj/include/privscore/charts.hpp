#pragma once

#include <string>
#include <vector>

namespace privscore {

struct ChartBar {
  std::string label;
  double value = 0.0;
  // Confidence whisker endpoints; set both to `value` to draw none.
  double lower = 0.0;
  double upper = 0.0;
};

// Horizontal bar chart around a zero axis, one row per bar, with optional CI
// whiskers and the numeric value printed beside each bar. Every coordinate
// and value is formatted to 6 decimals, so identical inputs yield a
// byte-identical document.
std::string bar_chart_svg(const std::string& title, const std::vector<ChartBar>& bars);

}  // namespace privscore
