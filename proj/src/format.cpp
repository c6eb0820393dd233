#include "privscore/format.hpp"

#include <cmath>
#include <cstdio>

namespace privscore {

namespace {

std::string format_fixed(double v, const char* fmt) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  std::string s(buf);
  // "-0.000000" carries no information; normalize to the positive form.
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') {
    s.erase(0, 1);
  }
  return s;
}

}  // namespace

std::string format_f6(double v) { return format_fixed(v, "%.6f"); }

std::string format_f4(double v) { return format_fixed(v, "%.4f"); }

double round6(double v) {
  if (!std::isfinite(v)) return v;
  double r = std::nearbyint(v * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // collapse -0.0
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace privscore
