#pragma once

#include <cstdio>
#include <string>

namespace uav2x {

// Floating-point CSV convention: 9 significant digits.
inline std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace uav2x
