#pragma once

#include <vector>

#include "matube/errors.hpp"

namespace matube {

// Neville polynomial extrapolation of (xs, ys) to x = 0.
inline double extrapolate_to_zero(std::vector<double> xs, std::vector<double> ys) {
  const int m = static_cast<int>(xs.size());
  if (m == 0 || ys.size() != xs.size())
    fail(ErrorCode::SpecInvalid, "extrapolation needs matching nonempty nodes");
  for (int level = 1; level < m; ++level) {
    for (int i = 0; i < m - level; ++i) {
      const double denom = xs[i] - xs[i + level];
      ys[i] = (0.0 - xs[i + level]) / denom * ys[i] + (xs[i] - 0.0) / denom * ys[i + 1];
    }
  }
  return ys[0];
}

}  // namespace matube
