#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "glkern/errors.hpp"
#include "glkern/numeric.hpp"

namespace glkern {

inline constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

enum class KernelFamily { Gaussian, Epanechnikov, Uniform };

struct KernelNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double sup = 0.0;
};

/// A symmetric univariate smoothing kernel K with unit mass.
///
/// Compact families are supported on [-1, 1] and vanish exactly outside it.
/// The Gaussian family has unbounded support; integrals over it are truncated
/// at |u| = `kGaussianReach`, beyond which the density is below 1e-31.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;

  static constexpr double kGaussianReach = 12.0;

  [[nodiscard]] constexpr bool compact() const noexcept {
    return family != KernelFamily::Gaussian;
  }

  /// Half-width of the (effective) support of K.
  [[nodiscard]] constexpr double reach() const noexcept {
    return compact() ? 1.0 : kGaussianReach;
  }

  /// K(u).
  [[nodiscard]] double operator()(double u) const noexcept {
    switch (family) {
      case KernelFamily::Gaussian:
        return kInvSqrt2Pi * std::exp(-0.5 * u * u);
      case KernelFamily::Epanechnikov:
        return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
      case KernelFamily::Uniform:
        return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    }
    return 0.0;
  }

  friend constexpr bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline std::string_view to_string(KernelFamily f) noexcept {
  switch (f) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Epanechnikov: return "epanechnikov";
    case KernelFamily::Uniform: return "uniform";
  }
  return "unknown";
}

inline KernelSpec kernel_from_string(std::string_view name) {
  if (name == "gaussian") return {KernelFamily::Gaussian};
  if (name == "epanechnikov") return {KernelFamily::Epanechnikov};
  if (name == "uniform") return {KernelFamily::Uniform};
  throw InvalidArgument("unknown kernel '" + std::string(name) +
                        "' (expected gaussian, epanechnikov or uniform)");
}

namespace detail {
inline void require_bandwidth(double h, const char* what) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidArgument(std::string(what) + " must be a positive finite bandwidth");
  }
}
}  // namespace detail

/// K_h(u) = K(u / h) / h.
inline double eval_scaled(const KernelSpec& k, double h, double u) {
  detail::require_bandwidth(h, "h");
  return k(u / h) / h;
}

/// (K_h * K_h2)(u).
///
/// Closed form for the Gaussian family (a centred normal density with variance
/// h^2 + h2^2); adaptive quadrature over the overlap of the supports otherwise.
inline double eval_convolved(const KernelSpec& k, double h, double h2, double u) {
  detail::require_bandwidth(h, "h");
  detail::require_bandwidth(h2, "h2");
  if (k.family == KernelFamily::Gaussian) {
    const double s = std::sqrt(h * h + h2 * h2);
    const double t = u / s;
    return kInvSqrt2Pi * std::exp(-0.5 * t * t) / s;
  }
  const double lo = std::max(-h, u - h2);
  const double hi = std::min(h, u + h2);
  if (!(hi > lo)) return 0.0;
  auto integrand = [&](double t) { return k(t / h) / h * k((u - t) / h2) / h2; };
  return integrate(integrand, lo, hi, 1e-10, 4);
}

inline KernelNorms kernel_norms(const KernelSpec& k) {
  switch (k.family) {
    case KernelFamily::Gaussian:
      return {1.0, 1.0 / std::sqrt(2.0 * std::sqrt(std::numbers::pi)), kInvSqrt2Pi};
    case KernelFamily::Epanechnikov:
      return {1.0, std::sqrt(0.6), 0.75};
    case KernelFamily::Uniform:
      return {1.0, std::sqrt(0.5), 0.5};
  }
  return {};
}

/// j-th moment of K computed by quadrature.
inline double kernel_moment(const KernelSpec& k, int j) {
  const double r = k.reach();
  return integrate([&](double u) { return std::pow(u, j) * k(u); }, -r, r, 1e-12, 32);
}

/// True iff the moments of order 1..m of K vanish within 1e-8.
inline bool kernel_order(const KernelSpec& k, int m) {
  if (m < 0) throw InvalidArgument("kernel order must be non-negative");
  for (int j = 1; j <= m; ++j) {
    if (std::abs(kernel_moment(k, j)) > 1e-8) return false;
  }
  return true;
}

/// int |u|^beta |K(u)| du, split at zero so the kink of |u|^beta is a node.
inline double kernel_abs_moment(const KernelSpec& k, double beta) {
  const double r = k.reach();
  auto f = [&](double u) { return std::pow(std::abs(u), beta) * std::abs(k(u)); };
  return integrate(f, -r, 0.0, 1e-12, 32) + integrate(f, 0.0, r, 1e-12, 32);
}

}  // namespace glkern
