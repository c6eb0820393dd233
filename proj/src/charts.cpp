#include "privscore/charts.hpp"

#include <algorithm>
#include <stdexcept>

#include "privscore/format.hpp"

namespace privscore {

namespace {

constexpr double kLabelGutter = 150.0;
constexpr double kPlotWidth = 480.0;
constexpr double kRowHeight = 30.0;
constexpr double kBarHeight = 16.0;
constexpr double kTopMargin = 40.0;

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::vector<ChartBar>& bars) {
  if (bars.empty()) throw std::invalid_argument("bar_chart_svg: no bars");

  double lo = 0.0, hi = 0.0;
  for (const ChartBar& b : bars) {
    lo = std::min({lo, b.value, b.lower});
    hi = std::max({hi, b.value, b.upper});
  }
  if (hi == lo) hi = lo + 1.0;
  const double pad = 0.08 * (hi - lo);
  lo -= pad;
  hi += pad;
  const auto x_of = [&](double v) {
    return kLabelGutter + (v - lo) / (hi - lo) * kPlotWidth;
  };

  const double height = kTopMargin + kRowHeight * bars.size() + 20.0;
  const double width = kLabelGutter + kPlotWidth + 90.0;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_f6(width) +
         "\" height=\"" + format_f6(height) + "\" font-family=\"sans-serif\">\n";
  svg += "<text x=\"" + format_f6(kLabelGutter) + "\" y=\"20\" font-size=\"15\">" +
         escape_xml(title) + "</text>\n";
  // Zero axis.
  svg += "<line x1=\"" + format_f6(x_of(0.0)) + "\" y1=\"" + format_f6(kTopMargin - 8.0) +
         "\" x2=\"" + format_f6(x_of(0.0)) + "\" y2=\"" +
         format_f6(kTopMargin + kRowHeight * bars.size()) +
         "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

  for (std::size_t i = 0; i < bars.size(); ++i) {
    const ChartBar& b = bars[i];
    const double row_top = kTopMargin + kRowHeight * i;
    const double bar_top = row_top + (kRowHeight - kBarHeight) / 2.0;
    const double mid = row_top + kRowHeight / 2.0;
    const double x0 = x_of(std::min(0.0, b.value));
    const double bar_w = x_of(std::max(0.0, b.value)) - x0;
    const char* fill = b.value < 0 ? "#c0504d" : "#4f81bd";

    svg += "<text x=\"" + format_f6(kLabelGutter - 8.0) + "\" y=\"" + format_f6(mid + 4.0) +
           "\" font-size=\"12\" text-anchor=\"end\">" + escape_xml(b.label) + "</text>\n";
    svg += "<rect x=\"" + format_f6(x0) + "\" y=\"" + format_f6(bar_top) + "\" width=\"" +
           format_f6(bar_w) + "\" height=\"" + format_f6(kBarHeight) + "\" fill=\"" + fill +
           "\"/>\n";
    if (b.upper > b.lower) {
      svg += "<line x1=\"" + format_f6(x_of(b.lower)) + "\" y1=\"" + format_f6(mid) +
             "\" x2=\"" + format_f6(x_of(b.upper)) + "\" y2=\"" + format_f6(mid) +
             "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
      for (double v : {b.lower, b.upper}) {
        svg += "<line x1=\"" + format_f6(x_of(v)) + "\" y1=\"" + format_f6(mid - 5.0) +
               "\" x2=\"" + format_f6(x_of(v)) + "\" y2=\"" + format_f6(mid + 5.0) +
               "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
      }
    }
    svg += "<text x=\"" + format_f6(kLabelGutter + kPlotWidth + 6.0) + "\" y=\"" +
           format_f6(mid + 4.0) + "\" font-size=\"12\">" + format_f6(b.value) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace privscore
