#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "glkern/errors.hpp"

namespace glkern::normal {

inline double pdf(double x) noexcept {
  return 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2 * std::exp(-0.5 * x * x);
}

inline double cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Phi^{-1}(u); returns -inf / +inf at 0 / 1.
inline double quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("normal quantile needs u in [0, 1]");
  if (u == 0.0) return -std::numeric_limits<double>::infinity();
  if (u == 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace glkern::normal
