#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "glkern/errors.hpp"
#include "glkern/run_config.hpp"
#include "glkern/theory_checks.hpp"

namespace glkern {

/// Named verification run with its verdict and machine-readable report.
struct CheckOutcome {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json report;
};

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {"lemma-a2", "bias",      "variance", "rate",
                                                 "oracle",   "bernstein", "constants"};
  return names;
}

/// sup |r''| on [lo, hi] by central differences on a 4001-point grid.
inline double second_derivative_sup(const RegressionFunction& r, double lo, double hi) {
  constexpr double step = 1e-4;
  double worst = 0.0;
  for (double u : linspace(lo, hi, 4001)) {
    worst = std::max(worst, std::abs((r(u + step) - 2.0 * r(u) + r(u - step)) / (step * step)));
  }
  return worst;
}

/// Model constants for a cell of this run at evaluation point x. L is 1
/// for sin, sup |r''| on the design support for curved r, cfg.L otherwise.
inline TheoryParams run_true_params(const RunConfig& cfg, std::size_t n, double x,
                                    const std::string& regression) {
  const auto r = regression_from_string(regression);
  double L = regression == "sin" ? 1.0 : second_derivative_sup(r, -cfg.c, cfg.c);
  if (!(L > 1e-6)) L = cfg.L;
  return true_params(cfg.process(), r, cfg.sigma, x, n, kernel_from_string(cfg.kernel), cfg.beta,
                     L, cfg.a, cfg.theory_gamma);
}

namespace detail {
inline std::size_t reps_or(const RunConfig& cfg, std::size_t fallback) {
  return cfg.check_replicas > 0 ? cfg.check_replicas : fallback;
}

inline bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }
}  // namespace detail

inline CheckOutcome run_check_lemma_a2(const RunConfig&) {
  const std::vector<std::uint64_t> ns = {4, 10, 100, 10000, 1000000};
  CheckOutcome out{"lemma-a2", true, {{"check", "lemma-a2"}}};
  out.report["sweeps"] = nlohmann::ordered_json::array();
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto rep = check_lemma_a2(a, ns, 100);
    out.pass = out.pass && rep.passed();
    out.report["sweeps"].push_back(rep.to_json());
  }
  out.report["pass"] = out.pass;
  return out;
}

/// r = sin (beta = 2, L = 1) at five points; bound and slope in [1.85, 2.15].
inline CheckOutcome run_check_bias(const RunConfig& cfg) {
  const std::vector<double> hs = {0.4, 0.2, 0.1, 0.05};
  const auto k = kernel_from_string(cfg.kernel);
  CheckOutcome out{"bias", true, {{"check", "bias"}, {"slope_band", {1.85, 2.15}}}};
  out.report["points"] = nlohmann::ordered_json::array();
  for (double x : {-1.0, -0.5, 0.3, 0.7, 1.2}) {
    const auto rep = check_bias_bound([](double u) { return std::sin(u); }, 2.0, 1.0, k, hs, x);
    out.pass = out.pass && rep.passed() && detail::within(rep.slope, 1.85, 2.15);
    out.report["points"].push_back(rep.to_json());
  }
  out.report["pass"] = out.pass;
  return out;
}

/// n = 2000, x = 0; bound at every h, slope in [-1.15, -0.85].
inline CheckOutcome run_check_variance(const RunConfig& cfg) {
  auto sc = cfg.study(2000, cfg.sigma);
  const std::vector<double> hs = {0.1, 0.05, 0.025, 0.0125};
  const auto p = run_true_params(cfg, sc.n, 0.0, sc.regression);
  const auto rep = check_variance_bound(sc, p, hs, 0.0, detail::reps_or(cfg, 500), cfg.workers);
  CheckOutcome out{"variance", rep.passed() && detail::within(rep.slope, -1.15, -0.85),
                   rep.to_json()};
  out.report["slope_band"] = {-1.15, -0.85};
  out.report["pass"] = out.pass;
  return out;
}

/// r = sin at x = 0.3, n in {500, 2000, 8000}; slope in [-1, -0.55] and
/// MSE strictly decreasing.
inline CheckOutcome run_check_rate(const RunConfig& cfg) {
  auto sc = cfg.study(500, cfg.sigma);
  sc.regression = "sin";
  const std::vector<std::size_t> ns = {500, 2000, 8000};
  const auto rep = check_rate(sc, ns, 0.3, cfg.beta, detail::reps_or(cfg, 200), cfg.workers);
  CheckOutcome out{"rate", rep.decreasing() && detail::within(rep.slope, -1.0, -0.55),
                   rep.to_json()};
  out.report["slope_band"] = {-1.0, -0.55};
  out.report["pass"] = out.pass;
  return out;
}

/// Calibrated GL at x = 0, n = 2000; ratio in [0.9, 2.5], literal bound holds.
inline CheckOutcome run_check_oracle(const RunConfig& cfg) {
  const auto sc = cfg.study(2000, cfg.sigma);
  const auto p = run_true_params(cfg, sc.n, 0.0, sc.regression);
  const auto rep = check_oracle_ratio(sc, p, 0.0, detail::reps_or(cfg, 50), cfg.workers);
  CheckOutcome out{"oracle", rep.literal_holds() && detail::within(rep.ratio, 0.9, 2.5),
                   rep.to_json()};
  out.report["ratio_band"] = {0.9, 2.5};
  out.report["pass"] = out.pass;
  return out;
}

/// n = 500, h = 0.1, x = 0 at the 0.5, 0.9 and 0.99 quantiles of |S_n|.
inline CheckOutcome run_check_bernstein(const RunConfig& cfg) {
  const auto sc = cfg.study(500, cfg.sigma);
  const auto p = run_true_params(cfg, sc.n, 0.0, sc.regression);
  const auto rep =
      check_bernstein_tail(p, sc, 0.1, 0.0, {}, detail::reps_or(cfg, 5000), cfg.workers);
  return {"bernstein", rep.passed(), rep.to_json()};
}

/// Constants at (n, h = 0.1, x0) plus the printed identities to 1e-12.
inline CheckOutcome run_check_constants(const RunConfig& cfg) {
  const auto p = run_true_params(cfg, cfg.n, cfg.x0, cfg.regression);
  const auto t = constants_table(p, cfg.n, 0.1);
  const auto nk = p.norms();
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
  const bool ok = rel(t.at("A1"), t.at("B1") + t.at("B2")) <= 1e-12 &&
                  rel(t.at("A6"), 1.0 + 2.0 * nk.l1) <= 1e-12 &&
                  rel(t.at("A8"), 2.0 * (1.0 + nk.l1 * nk.l1) * t.at("A5")) <= 1e-12 &&
                  rel(t.at("C_star_rate"),
                      t.at("A0") * t.at("A0") + t.at("A1") + t.at("A2")) <= 1e-12;
  nlohmann::ordered_json j{{"check", "constants"}, {"n", cfg.n}, {"h", 0.1}, {"x", cfg.x0}};
  j["params"] = {{"beta", p.beta}, {"L", p.L},         {"r_sup", p.r_sup}, {"g_inf", p.g_inf},
                 {"g_sup", p.g_sup}, {"Q", p.Q},       {"sigma", p.sigma}, {"a", p.a},
                 {"gamma", p.gamma}, {"kernel", std::string(to_string(p.kernel.family))}};
  j["constants"] = t.to_json();
  j["identities_hold"] = ok;
  j["pass"] = ok;
  return {"constants", ok, j};
}

inline CheckOutcome run_check(const std::string& name, const RunConfig& cfg) {
  if (name == "lemma-a2") return run_check_lemma_a2(cfg);
  if (name == "bias") return run_check_bias(cfg);
  if (name == "variance") return run_check_variance(cfg);
  if (name == "rate") return run_check_rate(cfg);
  if (name == "oracle") return run_check_oracle(cfg);
  if (name == "bernstein") return run_check_bernstein(cfg);
  if (name == "constants") return run_check_constants(cfg);
  throw InvalidArgument("unknown check '" + name + "'");
}

}  // namespace glkern
