#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "glkern/dgp.hpp"
#include "glkern/errors.hpp"
#include "glkern/estimator.hpp"
#include "glkern/gl.hpp"
#include "glkern/numeric.hpp"
#include "glkern/parallel.hpp"

namespace glkern {

/// `count` evenly spaced gamma values from lo to hi inclusive.
inline std::vector<double> build_gamma_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0)) throw InvalidArgument("gamma grid lower bound must be positive");
  if (!(lo < hi)) throw InvalidArgument("gamma grid needs lo < hi");
  if (count < 2) throw InvalidArgument("gamma grid needs at least two values");
  return linspace(lo, hi, count);
}

/// Estimation block, an unused gap of q points, then a holdout block of q.
struct CalibrationSplit {
  RegressionSample estimation;
  RegressionSample holdout;
  std::size_t gap = 0;
};

inline CalibrationSplit make_split(const RegressionSample& full, std::size_t n, std::size_t q) {
  full.validate();
  if (n == 0 || q == 0) throw InvalidArgument("split sizes n and q must be positive");
  if (full.size() != n + 2 * q) {
    throw InvalidArgument("calibration split needs exactly n + 2q observations");
  }
  return {full.slice(0, n), full.slice(n + q, q), q};
}

struct HoldoutPair {
  double x = 0.0;
  double y = 0.0;
};

/// Holdout pairs with lo <= x <= hi, sorted by x.
inline std::vector<HoldoutPair> holdout_grid(const RegressionSample& holdout, double lo = -1.0,
                                             double hi = 1.0) {
  std::vector<HoldoutPair> out;
  for (std::size_t i = 0; i < holdout.size(); ++i) {
    if (holdout.x[i] >= lo && holdout.x[i] <= hi) out.push_back({holdout.x[i], holdout.y[i]});
  }
  if (out.empty()) throw EmptyHoldout("no holdout design points inside the calibration interval");
  std::stable_sort(out.begin(), out.end(), [](auto a, auto b) { return a.x < b.x; });
  return out;
}

/// Cell widths d_i of the midpoint partition of [lo, hi] induced by the
/// sorted holdout abscissae.
inline std::vector<double> holdout_weights(std::span<const HoldoutPair> pairs, double lo = -1.0,
                                           double hi = 1.0) {
  const std::size_t p = pairs.size();
  if (p < 2) throw InsufficientHoldout("calibration needs at least two holdout points");
  std::vector<double> d(p);
  d.front() = (pairs[0].x + pairs[1].x) / 2.0 - lo;
  d.back() = hi - (pairs[p - 2].x + pairs[p - 1].x) / 2.0;
  for (std::size_t i = 1; i + 1 < p; ++i) d[i] = (pairs[i + 1].x - pairs[i - 1].x) / 2.0;
  return d;
}

/// sum_i d_i (prediction_i - y_i)^2.
inline double weighted_prediction_error(std::span<const HoldoutPair> pairs,
                                        std::span<const double> predictions) {
  if (predictions.size() != pairs.size()) {
    throw InvalidArgument("one prediction per holdout pair is required");
  }
  const auto d = holdout_weights(pairs);
  CompensatedSum err;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double e = predictions[i] - pairs[i].y;
    err += d[i] * e * e;
  }
  return err.value();
}

/// Error(gamma) computed from scratch: GL selection with this gamma at every
/// holdout abscissa on the estimation sample.
inline double calibration_error(double gamma, const RegressionSample& estimation,
                                std::span<const HoldoutPair> pairs, const DensityModel& g,
                                const KernelSpec& k, const GLOptions& opt = {},
                                std::optional<double> sigma2_hat = std::nullopt) {
  if (pairs.size() < 2) throw InsufficientHoldout("calibration needs at least two holdout points");
  const auto selector = sigma2_hat ? LocalSelector(estimation, g, k,
                                                   build_simulation_grid(estimation.size()), opt,
                                                   *sigma2_hat)
                                   : LocalSelector::with_defaults(estimation, g, k, opt);
  std::vector<double> pred(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pred[i] = selector.select(selector.prepare(pairs[i].x), gamma).estimate;
  }
  return weighted_prediction_error(pairs, pred);
}

struct CalibrationResult {
  double gamma_star = 0.0;
  std::vector<double> gammas;
  std::vector<double> errors;
};

/// Sweeps the gamma grid over already prepared holdout points; ties go to
/// the smallest gamma.
inline CalibrationResult calibrate_prepared(const LocalSelector& selector,
                                            std::span<const HoldoutPair> pairs,
                                            std::span<const LocalSelector::Point> prepared,
                                            std::span<const double> gamma_grid) {
  if (gamma_grid.empty()) throw InvalidArgument("gamma grid is empty");
  CalibrationResult res{0.0, {gamma_grid.begin(), gamma_grid.end()}, {}};
  res.errors.reserve(gamma_grid.size());
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> pred(pairs.size());
  for (double gamma : gamma_grid) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      pred[i] = selector.select(prepared[i], gamma).estimate;
    }
    const double err = weighted_prediction_error(pairs, pred);
    res.errors.push_back(err);
    if (err < best || (err == best && gamma < res.gamma_star)) {
      best = err;
      res.gamma_star = gamma;
    }
  }
  return res;
}

/// Prepares every holdout point once (the gamma-free part) and sweeps gamma.
inline CalibrationResult calibrate_with(const LocalSelector& selector,
                                        std::span<const HoldoutPair> pairs,
                                        std::span<const double> gamma_grid,
                                        std::size_t workers = 1) {
  if (pairs.size() < 2) throw InsufficientHoldout("calibration needs at least two holdout points");
  std::vector<LocalSelector::Point> prepared(pairs.size());
  parallel_for(pairs.size(), workers,
               [&](std::size_t i) { prepared[i] = selector.prepare(pairs[i].x); });
  return calibrate_prepared(selector, pairs, prepared, gamma_grid);
}

inline CalibrationResult calibrate(const CalibrationSplit& split, std::span<const double> gamma_grid,
                                   const DensityModel& g, const KernelSpec& k,
                                   const GLOptions& opt = {}, std::size_t workers = 1) {
  const auto pairs = holdout_grid(split.holdout);
  const auto selector = LocalSelector::with_defaults(split.estimation, g, k, opt);
  return calibrate_with(selector, pairs, gamma_grid, workers);
}

}  // namespace glkern
