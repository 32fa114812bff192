#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "glkern/errors.hpp"
#include "glkern/normal.hpp"
#include "glkern/numeric.hpp"
#include "glkern/rng.hpp"

namespace glkern {

/// Latent AR(1) chain Z_t = phi Z_{t-1} + rho xi_t observed through the
/// truncated-normal transform X_t = G^{-1}(Phi_{0,v}(Z_t)) on [-c, c].
struct ProcessSpec {
  double phi = 0.75;
  double rho = 1.0;
  double c = 2.0;

  void validate() const {
    if (!(std::abs(phi) < 1.0)) throw InvalidArgument("AR coefficient must satisfy |phi| < 1");
    if (!(rho > 0.0)) throw InvalidArgument("innovation scale rho must be positive");
    if (!(c > 0.0)) throw InvalidArgument("truncation half-width c must be positive");
  }

  /// Stationary variance rho^2 / (1 - phi^2) of the latent chain.
  [[nodiscard]] double latent_variance() const noexcept {
    return rho * rho / (1.0 - phi * phi);
  }

  friend bool operator==(const ProcessSpec&, const ProcessSpec&) = default;
};

/// Paired time-ordered design and response series.
struct RegressionSample {
  std::vector<double> x;
  std::vector<double> y;

  [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
  [[nodiscard]] bool empty() const noexcept { return x.empty(); }

  void validate() const {
    if (x.size() != y.size()) throw InvalidArgument("design and response lengths differ");
    if (x.empty()) throw InvalidArgument("regression sample is empty");
  }

  /// Contiguous block [first, first + count).
  [[nodiscard]] RegressionSample slice(std::size_t first, std::size_t count) const {
    if (first + count > size()) throw InvalidArgument("sample slice out of range");
    return {{x.begin() + first, x.begin() + first + count},
            {y.begin() + first, y.begin() + first + count}};
  }
};

/// Standard normal truncated to [-c, c].
class TruncatedNormal {
 public:
  explicit TruncatedNormal(double c) : c_(c) {
    if (!(c > 0.0)) throw InvalidArgument("truncation half-width c must be positive");
    lower_mass_ = normal::cdf(-c);
    p_ = normal::cdf(c) - lower_mass_;
  }

  [[nodiscard]] double half_width() const noexcept { return c_; }
  /// Mass p = Phi(c) - Phi(-c) of the untruncated law on [-c, c].
  [[nodiscard]] double mass() const noexcept { return p_; }

  [[nodiscard]] double pdf(double x) const noexcept {
    return (x < -c_ || x > c_) ? 0.0 : normal::pdf(x) / p_;
  }

  [[nodiscard]] double cdf(double x) const noexcept {
    if (x < -c_) return 0.0;
    if (x >= c_) return 1.0;
    return std::clamp((normal::cdf(x) - lower_mass_) / p_, 0.0, 1.0);
  }

  /// G^{-1}(u) = Phi^{-1}(p u + Phi(-c)).
  [[nodiscard]] double quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile input must lie in [0, 1]");
    return std::clamp(normal::quantile(p_ * u + lower_mass_), -c_, c_);
  }

 private:
  double c_;
  double lower_mass_;
  double p_;
};

inline TruncatedNormal trunc_normal(double c) { return TruncatedNormal(c); }

/// Stationary AR(1) path; Z_1 is drawn from the stationary law, no burn-in.
inline std::vector<double> simulate_ar1(const ProcessSpec& spec, std::size_t length,
                                        std::uint64_t seed) {
  spec.validate();
  if (length == 0) throw InvalidArgument("path length must be positive");
  NormalStream xi(seed);
  std::vector<double> z(length);
  z[0] = std::sqrt(spec.latent_variance()) * xi();
  for (std::size_t t = 1; t < length; ++t) z[t] = spec.phi * z[t - 1] + spec.rho * xi();
  return z;
}

/// X_t = G^{-1}(Phi_{0,v}(Z_t)) with v the stationary latent variance.
inline std::vector<double> transform_to_x(const std::vector<double>& z, const ProcessSpec& spec) {
  spec.validate();
  const TruncatedNormal g(spec.c);
  const double sd = std::sqrt(spec.latent_variance());
  std::vector<double> x(z.size());
  std::transform(z.begin(), z.end(), x.begin(),
                 [&](double zt) { return g.quantile(normal::cdf(zt / sd)); });
  return x;
}

using RegressionFunction = std::function<double(double)>;

/// r(x) = 0.7 x + 2 exp(-10 x^2), the simulation benchmark function.
inline double benchmark_regression(double x) noexcept {
  return 0.7 * x + 2.0 * std::exp(-10.0 * x * x);
}

/// Named regression functions usable from configuration files.
inline RegressionFunction regression_from_string(const std::string& name) {
  if (name == "benchmark") return benchmark_regression;
  if (name == "sin") return [](double x) { return std::sin(x); };
  if (name == "zero") return [](double) { return 0.0; };
  if (name == "linear") return [](double x) { return x; };
  throw InvalidArgument("unknown regression function '" + name +
                        "' (expected benchmark, sin, zero or linear)");
}

/// Y_i = r(X_i) + sigma eta_i on a fresh transformed AR(1) design path.
inline RegressionSample generate_sample(const ProcessSpec& spec, const RegressionFunction& r,
                                        double sigma, std::size_t n_total, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise level sigma must be non-negative");
  if (n_total == 0) throw InvalidArgument("sample size must be positive");
  RegressionSample s;
  s.x = transform_to_x(simulate_ar1(spec, n_total, derive_seed(seed, {kDesignStream})), spec);
  s.y.resize(n_total);
  NormalStream eta(derive_seed(seed, {kNoiseStream}));
  for (std::size_t i = 0; i < n_total; ++i) s.y[i] = r(s.x[i]) + sigma * eta();
  return s;
}

/// Biased-normalisation sample autocorrelation at lags 1..max_lag.
inline std::vector<double> sample_autocorrelation(const std::vector<double>& x,
                                                  std::size_t max_lag) {
  if (max_lag == 0) throw InvalidArgument("max_lag must be positive");
  if (x.size() <= max_lag) throw InvalidArgument("series shorter than max_lag + 1");
  const double m = mean(x);
  CompensatedSum c0;
  for (double v : x) c0 += (v - m) * (v - m);
  if (!(c0.value() > 0.0)) throw InvalidArgument("series has zero variance");
  std::vector<double> acf(max_lag);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    CompensatedSum ck;
    for (std::size_t t = 0; t + k < x.size(); ++t) ck += (x[t] - m) * (x[t + k] - m);
    acf[k - 1] = ck.value() / c0.value();
  }
  return acf;
}

}  // namespace glkern
