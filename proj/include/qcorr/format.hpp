#pragma once

#include <cstdio>
#include <string>

namespace qcorr {

/// Shortest decimal that round-trips a double ("%.17g").
inline std::string exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace qcorr
