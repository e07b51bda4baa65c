#pragma once

#include <cstdio>
#include <string>

namespace ergograph {

// Floats in CSV output carry 17 significant digits so values round-trip.
inline std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ergograph
