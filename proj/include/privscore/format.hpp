#pragma once

#include <string>

namespace privscore {

// All floating-point output (CSV, JSON, SVG) is rendered at 6 decimal places
// so that repeated runs with identical inputs produce byte-identical files.
std::string format_f6(double v);

// 4-decimal variant used by the regression summary table.
std::string format_f4(double v);

// Round to 6 decimal places (used before storing numbers into JSON documents).
double round6(double v);

// Quote a CSV field if it contains a comma, quote, or newline (RFC-4180).
std::string csv_field(const std::string& raw);

}  // namespace privscore
