#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "glkern/dgp.hpp"
#include "glkern/errors.hpp"
#include "glkern/kernels.hpp"
#include "glkern/numeric.hpp"

namespace glkern {

/// The known design density g.
struct DensityModel {
  std::function<double(double)> pdf;

  double operator()(double x) const { return pdf(x); }

  static DensityModel truncated_normal(double c) {
    TruncatedNormal tn(c);
    return {[tn](double x) { return tn.pdf(x); }};
  }
  static DensityModel constant(double value) {
    return {[value](double) { return value; }};
  }
};

namespace detail {

/// (1/n) sum_k Y_k w(X_k) / g(X_k), skipping zero weights without touching g.
template <class Weight>
double reweighted_average(const RegressionSample& sample, const DensityModel& g,
                          const Weight& weight) {
  sample.validate();
  CompensatedSum acc;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double w = weight(sample.x[i]);
    if (w == 0.0) continue;
    const double gi = g(sample.x[i]);
    if (!(gi > 0.0)) throw DegenerateDensity(i);
    acc += sample.y[i] * w / gi;
  }
  return acc.value() / static_cast<double>(sample.size());
}

}  // namespace detail

/// r_h(x) = (1/n) sum_k Y_k K_h(x - X_k) / g(X_k).
inline double nw_known_density(const RegressionSample& sample, const DensityModel& g,
                               const KernelSpec& k, double h, double x) {
  detail::require_bandwidth(h, "h");
  return detail::reweighted_average(sample, g, [&](double xi) { return k((x - xi) / h) / h; });
}

/// r_{h,h2}(x) = (1/n) sum_k Y_k (K_h * K_h2)(X_k - x) / g(X_k).
inline double aux_estimate(const RegressionSample& sample, const DensityModel& g,
                           const KernelSpec& k, double h, double h2, double x) {
  detail::require_bandwidth(h, "h");
  detail::require_bandwidth(h2, "h2");
  return detail::reweighted_average(sample, g,
                                    [&](double xi) { return eval_convolved(k, h, h2, xi - x); });
}

/// (K_h * r)(u) by quadrature over the kernel support.
template <class F>
double kernel_smooth(const F& r, const KernelSpec& k, double h, double u, double tol = 1e-9) {
  detail::require_bandwidth(h, "h");
  const double reach = k.reach();
  return integrate([&](double s) { return k(s) * r(u - h * s); }, -reach, reach, tol, 32);
}

/// C(h) = max over a 201-point grid on [lo, hi] of |(K_h * r)(u) - r(u)|.
template <class F>
double exact_bias_sup(const F& r, const KernelSpec& k, double h, double lo, double hi) {
  detail::require_bandwidth(h, "h");
  if (hi < lo) throw InvalidArgument("bias window must be nonempty");
  constexpr int kPoints = 201;
  double worst = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double u = (lo == hi) ? lo : lo + (hi - lo) * i / (kPoints - 1);
    worst = std::max(worst, std::abs(kernel_smooth(r, k, h, u) - r(u)));
  }
  return worst;
}

}  // namespace glkern
