#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glkern/dgp.hpp"
#include "glkern/errors.hpp"
#include "glkern/estimator.hpp"
#include "glkern/kernels.hpp"
#include "glkern/numeric.hpp"

namespace glkern {

// ---------------------------------------------------------------------------
// Bandwidth families
// ---------------------------------------------------------------------------

enum class GridKind { Theory, Simulation };

/// Finite bandwidth family H, stored largest first.
struct BandwidthGrid {
  std::vector<double> values;
  GridKind kind = GridKind::Simulation;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] bool empty() const noexcept { return values.empty(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values[i]; }
  [[nodiscard]] double largest() const { return *std::max_element(values.begin(), values.end()); }

  void validate() const {
    if (values.empty()) throw InvalidArgument("bandwidth grid is empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0)) throw InvalidArgument("bandwidths must be positive");
      if (i > 0 && !(values[i] < values[i - 1])) {
        throw InvalidArgument("bandwidth grid must be strictly decreasing");
      }
    }
  }
};

/// {e^{-i}: i = 0..M} intersected with [(log n)^8 / n, 1 / (log n)^2],
/// M = floor(log(n / (log n)^8)).
inline BandwidthGrid build_theory_grid(std::uint64_t n) {
  if (n < 2) throw InvalidArgument("theory grid needs n >= 2");
  const long double nn = static_cast<long double>(n);
  const long double ln = std::log(nn);
  const long double h_min = std::pow(ln, 8.0L) / nn;
  const long double h_max = 1.0L / (ln * ln);
  const long double m_real = std::floor(std::log(nn / std::pow(ln, 8.0L)));
  BandwidthGrid grid{{}, GridKind::Theory};
  for (long i = 0; i <= static_cast<long>(m_real); ++i) {
    const long double h = std::exp(-static_cast<long double>(i));
    if (h >= h_min && h <= h_max) grid.values.push_back(static_cast<double>(h));
  }
  if (grid.empty()) {
    throw EmptyGrid("theoretical bandwidth family is empty at n = " + std::to_string(n) +
                    " (h_min = " + std::to_string(static_cast<double>(h_min)) +
                    ", h_max = " + std::to_string(static_cast<double>(h_max)) +
                    "); use the simulation grid");
  }
  return grid;
}

/// {e^{-step j}: j = 0..j_max}, j_max = floor(floor(log n)^{2/3} / step).
inline BandwidthGrid build_simulation_grid(std::uint64_t n, double step = 0.1) {
  if (n < 2) throw InvalidArgument("simulation grid needs n >= 2");
  if (!(step > 0.0)) throw InvalidArgument("grid step must be positive");
  const double top = std::pow(std::floor(std::log(static_cast<double>(n))), 2.0 / 3.0);
  // The small slack keeps exact quotients such as 1.0 / 0.1 from rounding down.
  const auto j_max = static_cast<std::size_t>(std::floor(top / step + 1e-9));
  BandwidthGrid grid{{}, GridKind::Simulation};
  grid.values.reserve(j_max + 1);
  for (std::size_t j = 0; j <= j_max; ++j) {
    grid.values.push_back(std::exp(-step * static_cast<double>(j)));
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Plug-in constants
// ---------------------------------------------------------------------------

struct LocalConstants {
  double g_inf_hat = 0.0;
  double r_sup_hat = 0.0;
  std::size_t count = 0;
};

/// Min of g(X_j) and max of |Y_j| over design points in ]x - w, x + w[.
inline LocalConstants local_empirical_constants(const RegressionSample& sample,
                                                const DensityModel& g, double x,
                                                double half_width = 0.5) {
  sample.validate();
  if (!(half_width > 0.0)) throw InvalidArgument("window half-width must be positive");
  LocalConstants out{std::numeric_limits<double>::infinity(), 0.0, 0};
  for (std::size_t j = 0; j < sample.size(); ++j) {
    if (!(sample.x[j] > x - half_width && sample.x[j] < x + half_width)) continue;
    ++out.count;
    out.r_sup_hat = std::max(out.r_sup_hat, std::abs(sample.y[j]));
    const double gj = g(sample.x[j]);
    if (gj > 0.0) out.g_inf_hat = std::min(out.g_inf_hat, gj);
  }
  if (out.count == 0 || !std::isfinite(out.g_inf_hat)) throw NoLocalData(x);
  return out;
}

namespace detail {

// exp(-0.5 t^2) is exactly zero in double precision beyond this |t|.
inline constexpr double kGaussianUnderflow = 38.62;

inline std::vector<std::size_t> order_by_x(const RegressionSample& s) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
  return idx;
}

}  // namespace detail

/// Pilot bandwidth: leave-one-out cross-validation of the Gaussian
/// Nadaraya-Watson smoother over the simulation grid.
///
/// Every observation sharing the held-out design value is left out, so an
/// exactly duplicated sample selects the same bandwidth as the original.
/// Ties in the score go to the larger bandwidth.
inline double pilot_bandwidth(const RegressionSample& sample) {
  sample.validate();
  const std::size_t n = sample.size();
  if (n < 10) throw InsufficientData("pilot bandwidth needs at least 10 observations");
  const auto grid = build_simulation_grid(n);
  const auto order = detail::order_by_x(sample);
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = sample.x[order[i]];
    ys[i] = sample.y[order[i]];
  }
  std::vector<double> num(n), den(n);
  double best_h = grid[0];
  double best_score = std::numeric_limits<double>::infinity();
  for (double h : grid.values) {
    std::fill(num.begin(), num.end(), 0.0);
    std::fill(den.begin(), den.end(), 0.0);
    const double cutoff = detail::kGaussianUnderflow * h;
    const double inv_h = 1.0 / h;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = xs[j] - xs[i];
        if (d > cutoff) break;
        if (d == 0.0) continue;
        const double t = d * inv_h;
        const double w = std::exp(-0.5 * t * t);
        num[i] += w * ys[j];
        den[i] += w;
        num[j] += w * ys[i];
        den[j] += w;
      }
    }
    CompensatedSum score;
    bool defined = true;
    for (std::size_t i = 0; i < n && defined; ++i) {
      if (!(den[i] > 0.0)) {
        defined = false;
        break;
      }
      const double resid = ys[i] - num[i] / den[i];
      score += resid * resid;
    }
    if (!defined) continue;
    if (score.value() < best_score) {
      best_score = score.value();
      best_h = h;
    }
  }
  return best_h;
}

/// sigma^2 estimate (1/(n-1)) sum (Y_i - NW(X_i))^2 with the classical
/// ratio-form Nadaraya-Watson fit at bandwidth pilot_h.
inline double estimate_noise_variance(const RegressionSample& sample, double pilot_h,
                                      const KernelSpec& k) {
  sample.validate();
  detail::require_bandwidth(pilot_h, "pilot_h");
  const std::size_t n = sample.size();
  if (n < 2) throw InsufficientData("noise variance needs at least 2 observations");
  const auto order = detail::order_by_x(sample);
  const double reach = (k.compact() ? 1.0 : detail::kGaussianUnderflow) * pilot_h;
  CompensatedSum rss;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const double xi = sample.x[order[pos]];
    CompensatedSum num, den;
    auto visit = [&](std::size_t p) {
      const double w = k((xi - sample.x[order[p]]) / pilot_h);
      num += w * sample.y[order[p]];
      den += w;
    };
    visit(pos);
    for (std::size_t p = pos; p-- > 0;) {
      if (xi - sample.x[order[p]] > reach) break;
      visit(p);
    }
    for (std::size_t p = pos + 1; p < n; ++p) {
      if (sample.x[order[p]] - xi > reach) break;
      visit(p);
    }
    const double resid = sample.y[order[pos]] - num.value() / den.value();
    rss += resid * resid;
  }
  return rss.value() / static_cast<double>(n - 1);
}

struct NoiseEstimate {
  double pilot_h = 0.0;
  double sigma2 = 0.0;
};

inline NoiseEstimate estimate_noise(const RegressionSample& sample, const KernelSpec& k) {
  const double h = pilot_bandwidth(sample);
  return {h, estimate_noise_variance(sample, h, k)};
}

// ---------------------------------------------------------------------------
// Penalty
// ---------------------------------------------------------------------------

/// Sign of the exponent in delta_n = (log n)^{+-1/5}. The theory needs
/// delta_n -> 0; the simulation setting uses the positive exponent.
enum class DeltaExponent { Theory, Simulation };

inline double delta_n(std::size_t n, DeltaExponent e) {
  const double ln = std::log(static_cast<double>(n));
  return std::pow(ln, e == DeltaExponent::Theory ? -0.2 : 0.2);
}

struct GLContext {
  double gamma = 0.0;
  double delta_n = 0.0;
  double a1_hat = 0.0;
  KernelNorms norms;
  std::size_t n = 0;

  /// True when gamma lies in the regime the oracle inequality covers.
  [[nodiscard]] bool theory_regime() const noexcept { return gamma > 2.0; }
};

/// A1 = (r_sup^2 + sigma^2) ||K||_2^2 / g_inf.
inline double a1_constant(double g_inf, double r_sup, double sigma2, const KernelNorms& norms) {
  return (r_sup * r_sup + sigma2) * norms.l2 * norms.l2 / g_inf;
}

/// V1(h) = sqrt(2 gamma A1 log n / (n h)) (1 + delta_n).
inline double penalty_v1(const GLContext& ctx, double h) {
  detail::require_bandwidth(h, "h");
  const double ln = std::log(static_cast<double>(ctx.n));
  return std::sqrt(2.0 * ctx.gamma * ctx.a1_hat * ln / (static_cast<double>(ctx.n) * h)) *
         (1.0 + ctx.delta_n);
}

/// V2(h) = ||K||_1 V1(h).
inline double penalty_v2(const GLContext& ctx, double h) { return ctx.norms.l1 * penalty_v1(ctx, h); }

/// V(h) = sqrt(2 gamma A1) (||K||_1 + 1)(1 + delta_n) sqrt(log n / (n h)).
inline double penalty_v(const GLContext& ctx, double h) {
  detail::require_bandwidth(h, "h");
  const double ln = std::log(static_cast<double>(ctx.n));
  return std::sqrt(2.0 * ctx.gamma * ctx.a1_hat) * (ctx.norms.l1 + 1.0) * (1.0 + ctx.delta_n) *
         std::sqrt(ln / (static_cast<double>(ctx.n) * h));
}

struct GLOptions {
  double half_width = 0.5;
  DeltaExponent delta = DeltaExponent::Theory;
};

/// Assemble the plug-in context at x. The noise variance is re-estimated
/// from a cross-validated pilot unless `sigma2_hat` is supplied.
inline GLContext make_context(const RegressionSample& sample, const DensityModel& g,
                              const KernelSpec& k, double x, double gamma,
                              const GLOptions& opt = {},
                              std::optional<double> sigma2_hat = std::nullopt) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  const auto local = local_empirical_constants(sample, g, x, opt.half_width);
  const double s2 = sigma2_hat ? *sigma2_hat : estimate_noise(sample, k).sigma2;
  const auto norms = kernel_norms(k);
  return {gamma, delta_n(sample.size(), opt.delta),
          a1_constant(local.g_inf_hat, local.r_sup_hat, s2, norms), norms, sample.size()};
}

// ---------------------------------------------------------------------------
// Estimates at one point, shared across gamma values
// ---------------------------------------------------------------------------

/// r_{h'}(x) and r_{h,h'}(x) for every pair in the grid at a fixed x.
/// None of these depend on gamma, so a gamma sweep reuses them.
struct PointEstimates {
  double x = 0.0;
  std::vector<double> single;  // r_{h_j}(x)
  std::vector<double> aux;     // r_{h_i,h_j}(x), row-major, symmetric

  [[nodiscard]] std::size_t size() const noexcept { return single.size(); }
  [[nodiscard]] double pair(std::size_t i, std::size_t j) const { return aux[i * size() + j]; }
};

namespace detail {

/// Gaussian fast path: every estimate is (1/n) sum_k v_k phi_s(d_k) for
/// some scale s, with v_k = Y_k / g(X_k) and d_k = X_k - x.
class GaussianPointSums {
 public:
  GaussianPointSums(const RegressionSample& sample, const DensityModel& g, double x,
                    double max_scale)
      : n_(static_cast<double>(sample.size())) {
    const double cutoff = kGaussianUnderflow * max_scale;
    std::vector<std::pair<double, std::size_t>> near;
    near.reserve(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      const double d = sample.x[i] - x;
      if (std::abs(d) <= cutoff) near.emplace_back(d, i);
    }
    std::stable_sort(near.begin(), near.end(), [](const auto& a, const auto& b) {
      return std::abs(a.first) < std::abs(b.first);
    });
    dist_.reserve(near.size());
    value_.reserve(near.size());
    for (const auto& [d, i] : near) {
      const double gi = g(sample.x[i]);
      if (!(gi > 0.0)) throw DegenerateDensity(i);
      dist_.push_back(std::abs(d));
      value_.push_back(sample.y[i] / gi);
    }
  }

  [[nodiscard]] double at_scale(double s) const {
    const double cutoff = kGaussianUnderflow * s;
    const double inv_s = 1.0 / s;
    CompensatedSum acc;
    for (std::size_t k = 0; k < dist_.size() && dist_[k] <= cutoff; ++k) {
      const double t = dist_[k] * inv_s;
      acc += value_[k] * std::exp(-0.5 * t * t);
    }
    return acc.value() * kInvSqrt2Pi * inv_s / n_;
  }

 private:
  double n_;
  std::vector<double> dist_;
  std::vector<double> value_;
};

}  // namespace detail

inline PointEstimates compute_point_estimates(const RegressionSample& sample,
                                              const DensityModel& g, const KernelSpec& k,
                                              const BandwidthGrid& grid, double x) {
  sample.validate();
  if (grid.empty()) throw InvalidArgument("bandwidth grid is empty");
  const std::size_t m = grid.size();
  PointEstimates out{x, std::vector<double>(m), std::vector<double>(m * m)};
  if (k.family == KernelFamily::Gaussian) {
    const detail::GaussianPointSums sums(sample, g, x, std::sqrt(2.0) * grid.largest());
    for (std::size_t j = 0; j < m; ++j) out.single[j] = sums.at_scale(grid[j]);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        const double v = sums.at_scale(std::sqrt(grid[i] * grid[i] + grid[j] * grid[j]));
        out.aux[i * m + j] = v;
        out.aux[j * m + i] = v;
      }
    }
    return out;
  }
  for (std::size_t j = 0; j < m; ++j) out.single[j] = nw_known_density(sample, g, k, grid[j], x);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i; j < m; ++j) {
      const double v = aux_estimate(sample, g, k, grid[i], grid[j], x);
      out.aux[i * m + j] = v;
      out.aux[j * m + i] = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection rule
// ---------------------------------------------------------------------------

struct SelectionRow {
  double h = 0.0;
  double a = 0.0;
  double v = 0.0;
  double total = 0.0;
};

struct Selection {
  double h_hat = 0.0;
  std::size_t index = 0;
  double estimate = 0.0;  // r_{h_hat}(x)
  std::vector<SelectionRow> table;
};

/// A(h_i, x) for every grid member, from cached estimates and penalties.
inline std::vector<double> proxy_a_all(const PointEstimates& est, std::span<const double> v) {
  const std::size_t m = est.size();
  std::vector<double> a(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      worst = std::max(worst, std::abs(est.pair(i, j) - est.single[j]) - v[j]);
    }
    a[i] = worst;
  }
  return a;
}

/// argmin_h A(h,x) + V(h); ties go to the largest bandwidth.
inline Selection select_from_estimates(const PointEstimates& est, const BandwidthGrid& grid,
                                       const GLContext& ctx) {
  const std::size_t m = grid.size();
  if (m == 0 || est.size() != m) throw InvalidArgument("estimates do not match the grid");
  std::vector<double> v(m);
  for (std::size_t j = 0; j < m; ++j) v[j] = penalty_v(ctx, grid[j]);
  const auto a = proxy_a_all(est, v);
  Selection sel;
  sel.table.resize(m);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const double total = a[i] + v[i];
    sel.table[i] = {grid[i], a[i], v[i], total};
    if (total < best || (total == best && grid[i] > sel.h_hat)) {
      best = total;
      sel.h_hat = grid[i];
      sel.index = i;
    }
  }
  sel.estimate = est.single[sel.index];
  return sel;
}

/// A(h, x) = max_{h' in H} {|r_{h,h'}(x) - r_{h'}(x)| - V(h')}_+, evaluated
/// directly from the estimator definitions.
inline double proxy_a(const RegressionSample& sample, const DensityModel& g, const KernelSpec& k,
                      const GLContext& ctx, const BandwidthGrid& grid, double h, double x) {
  if (grid.empty()) throw InvalidArgument("bandwidth grid is empty");
  double worst = 0.0;
  for (double hp : grid.values) {
    const double diff =
        std::abs(aux_estimate(sample, g, k, h, hp, x) - nw_known_density(sample, g, k, hp, x));
    worst = std::max(worst, diff - penalty_v(ctx, hp));
  }
  return worst;
}

inline Selection select_bandwidth(const RegressionSample& sample, const DensityModel& g,
                                  const KernelSpec& k, const GLContext& ctx,
                                  const BandwidthGrid& grid, double x) {
  return select_from_estimates(compute_point_estimates(sample, g, k, grid, x), grid, ctx);
}

// ---------------------------------------------------------------------------
// Pointwise adaptive estimator over one sample
// ---------------------------------------------------------------------------

/// Binds a sample to its grid and noise estimate so that many points and
/// many gamma values can be processed without recomputing shared pieces.
class LocalSelector {
 public:
  struct Point {
    PointEstimates estimates;
    double a1_hat = 0.0;
  };

  LocalSelector(RegressionSample sample, DensityModel g, KernelSpec k, BandwidthGrid grid,
                GLOptions opt, double sigma2_hat)
      : sample_(std::move(sample)), g_(std::move(g)), k_(k), grid_(std::move(grid)), opt_(opt),
        sigma2_(sigma2_hat), norms_(kernel_norms(k_)) {
    sample_.validate();
    grid_.validate();
  }

  /// Uses the simulation grid for the sample size and a cross-validated
  /// noise estimate.
  static LocalSelector with_defaults(RegressionSample sample, DensityModel g, KernelSpec k,
                                     GLOptions opt) {
    auto grid = build_simulation_grid(sample.size());
    const double s2 = estimate_noise(sample, k).sigma2;
    return {std::move(sample), std::move(g), k, std::move(grid), opt, s2};
  }

  [[nodiscard]] Point prepare(double x) const {
    const auto local = local_empirical_constants(sample_, g_, x, opt_.half_width);
    return {compute_point_estimates(sample_, g_, k_, grid_, x),
            a1_constant(local.g_inf_hat, local.r_sup_hat, sigma2_, norms_)};
  }

  [[nodiscard]] GLContext context(const Point& p, double gamma) const {
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    return {gamma, delta_n(sample_.size(), opt_.delta), p.a1_hat, norms_, sample_.size()};
  }

  [[nodiscard]] Selection select(const Point& p, double gamma) const {
    return select_from_estimates(p.estimates, grid_, context(p, gamma));
  }

  [[nodiscard]] const BandwidthGrid& grid() const noexcept { return grid_; }
  [[nodiscard]] const RegressionSample& sample() const noexcept { return sample_; }
  [[nodiscard]] const DensityModel& density() const noexcept { return g_; }
  [[nodiscard]] const KernelSpec& kernel() const noexcept { return k_; }
  [[nodiscard]] const GLOptions& options() const noexcept { return opt_; }
  [[nodiscard]] double sigma2_hat() const noexcept { return sigma2_; }

 private:
  RegressionSample sample_;
  DensityModel g_;
  KernelSpec k_;
  BandwidthGrid grid_;
  GLOptions opt_;
  double sigma2_;
  KernelNorms norms_;
};

}  // namespace glkern
