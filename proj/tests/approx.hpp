#pragma once

#include <algorithm>
#include <cmath>

// Relative error with a symmetric scale; 0 when both sides are 0.
inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}
