#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace phasekit {

/// Shortest "%.17g" rendering; round-trips every double. Non-finite values
/// print as nan, inf, -inf.
inline std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace phasekit
