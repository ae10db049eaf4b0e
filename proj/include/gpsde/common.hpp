#pragma once
// Error taxonomy and small formatting helpers shared across the library.

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace gpsde {

// Bad parameters, malformed config files, infeasible windows. CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Factorization failures, degenerate values, non-finite intermediates. CLI exit code 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest representation that round-trips a double exactly; used for all CSV
// output so that reports are byte-stable across runs and thread counts.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // trim to the shortest form that still round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char test[40];
    std::snprintf(test, sizeof(test), "%.*g", prec, x);
    if (std::strtod(test, nullptr) == x) return test;
  }
  return buf;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw config_error(msg);
}

}  // namespace gpsde
