#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glkern/calibration.hpp"
#include "glkern/dgp.hpp"
#include "glkern/errors.hpp"
#include "glkern/estimator.hpp"
#include "glkern/gl.hpp"
#include "glkern/kernels.hpp"
#include "glkern/mc_study.hpp"
#include "glkern/normal.hpp"
#include "glkern/numeric.hpp"
#include "glkern/parallel.hpp"
#include "glkern/rng.hpp"

namespace glkern {

/// Model and smoothness constants entering the non-asymptotic bounds.
struct TheoryParams {
  double beta = 2.0;
  double L = 1.0;
  double r_sup = 1.0;
  double g_inf = 1.0;
  double g_sup = 1.0;
  double Q = 1.0;
  double sigma = 1.0;
  double a = 0.75;
  double gamma = 2.5;
  KernelSpec kernel{};

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string(name) + " must be positive and finite");
      }
    };
    positive(beta, "beta");
    positive(L, "L");
    positive(r_sup, "r_sup");
    positive(g_inf, "g_inf");
    positive(g_sup, "g_sup");
    positive(Q, "Q");
    positive(sigma, "sigma");
    positive(gamma, "gamma");
    if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("mixing rate a must lie in (0, 1)");
    if (g_inf > g_sup) throw InvalidArgument("g_inf must not exceed g_sup");
  }

  [[nodiscard]] KernelNorms norms() const { return kernel_norms(kernel); }
};

/// l = largest integer strictly below beta.
inline int holder_index(double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
  return static_cast<int>(std::ceil(beta)) - 1;
}

/// A0 = L / l! * int |u|^beta |K(u)| du.
inline double a0_constant(const KernelSpec& k, double beta, double L) {
  const int l = holder_index(beta);
  return L / std::tgamma(static_cast<double>(l) + 1.0) * kernel_abs_moment(k, beta);
}

/// Named constants in insertion order.
class ConstantsTable {
 public:
  void set(std::string name, double value) { entries_.emplace_back(std::move(name), value); }

  [[nodiscard]] double at(const std::string& name) const {
    for (const auto& [k, v] : entries_) {
      if (k == name) return v;
    }
    throw InvalidArgument("no constant named '" + name + "'");
  }

  [[nodiscard]] const std::vector<std::pair<std::string, double>>& entries() const noexcept {
    return entries_;
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : entries_) {
      if (std::isfinite(v)) {
        j[k] = v;
      } else {
        j[k] = v > 0 ? "inf" : "nan";
      }
    }
    return j;
  }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

/// Every constant of the non-asymptotic analysis at sample size n and
/// bandwidth h (only calA_n and calB_n depend on h). B10 and everything
/// built on it are infinite when gamma <= 2.
inline ConstantsTable constants_table(const TheoryParams& p, std::uint64_t n, double h) {
  p.validate();
  if (n < 2) throw InvalidArgument("n must be at least 2");
  detail::require_bandwidth(h, "h");
  const auto nk = p.norms();
  const double log_n = std::log(static_cast<double>(n));
  const double abs_log_a = std::abs(std::log(p.a));
  const double s2 = p.sigma * p.sigma;
  const double r2 = p.r_sup * p.r_sup;
  const double gi = p.g_inf;
  const double min1 = std::min(1.0, abs_log_a);
  const double sqrt2pi = std::sqrt(2.0 * std::numbers::pi);

  const double A0 = a0_constant(p.kernel, p.beta, p.L);
  const double A1 = (1.0 / gi) * nk.l2 * nk.l2 * (r2 + s2);
  const double B1 = s2 / gi * nk.l2 * nk.l2;
  const double B2 = r2 / gi * nk.l2 * nk.l2;
  const double A3 = r2 * nk.l1 * nk.l1 * (p.Q / (gi * gi) + 1.0);
  const double A4 = 4.0 / (1.0 - p.a) * r2 / (gi * gi) * nk.sup * nk.sup;
  const double A2_prop = 2.0 * A3 + 4.0 / abs_log_a * A4;
  const double A2_app = 2.0 * A3 / abs_log_a + 20.0 * A4;
  const double A2 = std::max(A2_prop, A2_app);
  const double B3 = (p.r_sup + 2.0 * p.sigma / sqrt2pi) * nk.l1;
  const double B4 = std::pow(p.r_sup + 2.0 * p.sigma / sqrt2pi, 2) / (gi * gi) * p.Q * nk.l1 * nk.l1;
  const double B5 = B4 + B3 * B3;
  const double B6 = 2.0 * nk.sup / gi;
  const double B7 = std::cbrt(std::pow(4.0 * B5 * B6 * (p.sigma + p.r_sup), 2));
  const double B8 = 2.0 * B5 / abs_log_a + 18.0 * B7 / (1.0 - std::cbrt(p.a));
  const double B = 12.0 * std::max(B6, std::sqrt(B7)) / min1 *
                   std::max(128.0 * 3.0 * B7 / std::cbrt(p.a) / (A1 * min1), 1.0);
  const double B9 = nk.sup * nk.sup / (gi * gi) * std::sqrt(8.0 * (r2 * r2 + 3.0 * s2 * s2)) *
                    std::sqrt(2.0 / sqrt2pi);
  const double geo = 1.0 - std::exp(-(p.gamma - 2.0) / 2.0);
  const double B10 =
      p.gamma > 2.0 ? 48.0 / geo * (A1 + B8) +
                          120.0 * 262144.0 * 3.0 * B * B / geo * std::pow(p.sigma + p.r_sup, 2)
                    : std::numeric_limits<double>::infinity();
  const double A5 = B9 + 2.0 * B10;
  const double A6 = 1.0 + 2.0 * nk.l1;
  const double A7 = std::sqrt(A1 + A2) + 2.0 * std::sqrt(2.0 * p.gamma * A1) * (nk.l1 + 1.0);
  const double A8 = 2.0 * (1.0 + nk.l1 * nk.l1) * A5;
  const double C_rate = A0 * A0 + A1 + A2;
  const double C_oracle = A0 * A6 + 2.0 * std::exp(-0.5) * A7 + A8;
  const double M_n = p.sigma * log_n + p.r_sup;
  const double nh = static_cast<double>(n) * h;
  const double calA = A1 / nh + B8 / std::sqrt(log_n) / nh;
  const double calB = B * M_n / nh;

  ConstantsTable t;
  t.set("A0", A0);
  t.set("A1", A1);
  t.set("A2_prop42", A2_prop);
  t.set("A2_appendix", A2_app);
  t.set("A2", A2);
  t.set("A3", A3);
  t.set("A4", A4);
  t.set("A5", A5);
  t.set("A6", A6);
  t.set("A7", A7);
  t.set("A8", A8);
  t.set("B", B);
  t.set("B1", B1);
  t.set("B2", B2);
  t.set("B3", B3);
  t.set("B4", B4);
  t.set("B5", B5);
  t.set("B6", B6);
  t.set("B7", B7);
  t.set("B8", B8);
  t.set("B9", B9);
  t.set("B10", B10);
  t.set("C_star_rate", C_rate);
  t.set("C_star_oracle", C_oracle);
  t.set("M_n", M_n);
  t.set("calA_n", calA);
  t.set("calB_n", calB);
  return t;
}

/// Density of (X_t, X_{t+k}) for the transformed AR(1) design: the Gaussian
/// copula with correlation phi^k times g(u) g(v).
inline double lag_joint_density(const ProcessSpec& proc, std::size_t k, double u, double v) {
  proc.validate();
  if (k == 0) throw InvalidArgument("lag must be positive");
  const TruncatedNormal g(proc.c);
  if (std::abs(u) > proc.c || std::abs(v) > proc.c) return 0.0;
  const double rho = std::pow(proc.phi, static_cast<double>(k));
  const double wu = normal::quantile(g.cdf(u));
  const double wv = normal::quantile(g.cdf(v));
  if (!std::isfinite(wu) || !std::isfinite(wv)) return std::numeric_limits<double>::infinity();
  const double q = 1.0 - rho * rho;
  const double copula = std::exp(-(rho * rho * (wu * wu + wv * wv) - 2.0 * rho * wu * wv) / (2.0 * q)) /
                        std::sqrt(q);
  return copula * g.pdf(u) * g.pdf(v);
}

/// Radius of the window B(x) = [x - 2/(log n)^2, x + 2/(log n)^2].
inline double window_radius(std::uint64_t n) {
  const double l = std::log(static_cast<double>(n));
  return 2.0 / (l * l);
}

/// True constants of the simulated model. r_sup, g_inf and g_sup are taken
/// over the whole design support [-c, c]; Q is the largest lag-k joint
/// density over B(x)^2, scanned on a 41 x 41 grid for every lag with
/// phi^k above 1e-12.
inline TheoryParams true_params(const ProcessSpec& proc, const RegressionFunction& r, double sigma,
                                double x, std::uint64_t n, const KernelSpec& k, double beta,
                                double L, double a, double gamma) {
  proc.validate();
  const TruncatedNormal g(proc.c);
  TheoryParams p;
  p.beta = beta;
  p.L = L;
  p.a = a;
  p.gamma = gamma;
  p.kernel = k;
  p.sigma = sigma;
  double rs = 0.0;
  for (double u : linspace(-proc.c, proc.c, 8001)) rs = std::max(rs, std::abs(r(u)));
  p.r_sup = rs;
  p.g_inf = g.pdf(proc.c);
  p.g_sup = g.pdf(std::clamp(0.0, -proc.c, proc.c));
  const double rad = window_radius(n);
  const double lo = std::max(-proc.c, x - rad);
  const double hi = std::min(proc.c, x + rad);
  if (lo > hi) throw InvalidArgument("evaluation point lies outside the design support");
  const auto box = linspace(lo, hi, 41);
  double q = 0.0;
  for (std::size_t lag = 1; std::pow(proc.phi, static_cast<double>(lag)) > 1e-12 || lag == 1;
       ++lag) {
    for (double u : box) {
      for (double v : box) q = std::max(q, lag_joint_density(proc, lag, u, v));
    }
    if (proc.phi == 0.0) break;
  }
  p.Q = q;
  return p;
}

/// A Monte Carlo estimate against its theoretical bound.
struct BoundCheck {
  double estimate = 0.0;
  double se = 0.0;
  double bound = 0.0;

  [[nodiscard]] bool pass() const { return estimate - 3.0 * se <= bound; }
};

inline nlohmann::ordered_json to_json(const BoundCheck& b) {
  return {{"estimate", b.estimate}, {"se", b.se}, {"bound", b.bound}, {"pass", b.pass()}};
}

// ---------------------------------------------------------------- lemma A2

struct LemmaA2Row {
  std::uint64_t n = 0;
  double h_lo = 0.0;
  double h_hi = 0.0;
  std::size_t count = 0;
  double max_ratio = 0.0;
  std::size_t violations = 0;
};

struct LemmaA2Report {
  double a = 0.0;
  std::vector<LemmaA2Row> rows;

  [[nodiscard]] bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.violations == 0; });
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"check", "lemma-a2"}, {"a", a}, {"pass", passed()}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"n", r.n}, {"h_lo", r.h_lo}, {"h_hi", r.h_hi}, {"count", r.count},
                           {"max_ratio", r.max_ratio}, {"violations", r.violations}});
    }
    return j;
  }
};

/// (1/h) a^{1 / (h |log a| sqrt(log n))}.
inline double lemma_a2_lhs(double a, std::uint64_t n, double h) {
  const double l = std::log(static_cast<double>(n));
  return std::pow(a, 1.0 / (h * std::abs(std::log(a)) * std::sqrt(l))) / h;
}

/// 10 / (log n)^{5/2}.
inline double lemma_a2_rhs(std::uint64_t n) {
  return 10.0 / std::pow(std::log(static_cast<double>(n)), 2.5);
}

/// Sweeps h_count log-spaced bandwidths between log n / n and 1/(log n)^2
/// (whichever is smaller first) for every n.
inline LemmaA2Report check_lemma_a2(double a, std::span<const std::uint64_t> n_list,
                                    std::size_t h_count = 100) {
  if (!(a > 0.0 && a < 1.0)) throw InvalidArgument("a must lie in (0, 1)");
  if (h_count < 2) throw InvalidArgument("h_count must be at least 2");
  LemmaA2Report rep{a, {}};
  for (auto n : n_list) {
    if (n < 4) throw InvalidArgument("the inequality requires n >= 4");
    const double l = std::log(static_cast<double>(n));
    const double e1 = l / static_cast<double>(n);
    const double e2 = 1.0 / (l * l);
    LemmaA2Row row{n, std::min(e1, e2), std::max(e1, e2), h_count, 0.0, 0};
    const double rhs = lemma_a2_rhs(n);
    for (double h : logspace(row.h_lo, row.h_hi, h_count)) {
      const double ratio = lemma_a2_lhs(a, n, h) / rhs;
      row.max_ratio = std::max(row.max_ratio, ratio);
      if (!(ratio <= 1.0)) ++row.violations;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

// -------------------------------------------------------------------- bias

struct BiasRow {
  double h = 0.0;
  double bias = 0.0;
  double bound = 0.0;
};

struct BiasReport {
  double x = 0.0;
  double beta = 0.0;
  double A0 = 0.0;
  std::vector<BiasRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.bias <= r.bound; });
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"check", "bias"}, {"x", x}, {"beta", beta}, {"A0", A0}};
    j["slope"] = std::isfinite(slope) ? nlohmann::ordered_json(slope) : nlohmann::ordered_json(nullptr);
    j["pass"] = passed();
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) j["rows"].push_back({{"h", r.h}, {"bias", r.bias}, {"bound", r.bound}});
    return j;
  }
};

/// |K_h * r(x) - r(x)| against A0 h^beta; the slope of log bias on log h is
/// fitted when every bias is above 1e-13.
template <class F>
BiasReport check_bias_bound(const F& r, double beta, double L, const KernelSpec& k,
                            std::span<const double> h_list, double x) {
  if (!kernel_order(k, holder_index(beta))) {
    throw InvalidArgument("kernel order is below the smoothness index");
  }
  if (h_list.empty()) throw InvalidArgument("h_list is empty");
  BiasReport rep;
  rep.x = x;
  rep.beta = beta;
  rep.A0 = a0_constant(k, beta, L);
  std::vector<double> hs, bs;
  bool loggable = h_list.size() >= 2;
  for (double h : h_list) {
    const double bias = exact_bias_sup(r, k, h, x, x);
    rep.rows.push_back({h, bias, rep.A0 * std::pow(h, beta)});
    hs.push_back(h);
    bs.push_back(bias);
    if (!(bias > 1e-13)) loggable = false;
  }
  if (loggable) rep.slope = loglog_slope(hs, bs);
  return rep;
}

// ---------------------------------------------------------------- variance

namespace detail {
inline constexpr std::uint64_t kVarianceTag = 0x7661;
inline constexpr std::uint64_t kRateTag = 0x7261;
inline constexpr std::uint64_t kOracleTag = 0x6f72;
inline constexpr std::uint64_t kBernsteinTag = 0x6265;
inline constexpr std::uint64_t kMeanTag = 0x6d65;

/// Sample mean and the standard error of the sample variance,
/// sqrt(var((v - mean)^2) / m).
inline std::pair<double, double> variance_with_se(std::span<const double> v) {
  const double m = mean(v);
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  const double var = sample_variance(v);
  const double se = std::sqrt(sample_variance(sq) / static_cast<double>(v.size()));
  return {var, se};
}
}  // namespace detail

struct VarianceRow {
  double h = 0.0;
  BoundCheck check;
};

struct VarianceReport {
  double x = 0.0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  double A1 = 0.0;
  double A2 = 0.0;
  std::vector<VarianceRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.check.pass(); });
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"check", "variance"}, {"x", x},   {"n", n},
                             {"replicas", replicas}, {"A1", A1}, {"A2", A2}};
    j["slope"] = std::isfinite(slope) ? nlohmann::ordered_json(slope) : nlohmann::ordered_json(nullptr);
    j["pass"] = passed();
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      auto row = glkern::to_json(r.check);
      row["h"] = r.h;
      j["rows"].push_back(row);
    }
    return j;
  }
};

/// Monte Carlo variance of r_h(x) over independent paths of length cfg.n
/// against A1/(nh) + A2 (log n)^{-1/2}/(nh), A2 the larger printed variant.
/// All bandwidths share the same paths.
inline VarianceReport check_variance_bound(const StudyConfig& cfg, const TheoryParams& p,
                                           std::span<const double> h_list, double x,
                                           std::size_t replicas, std::size_t workers = 1) {
  p.validate();
  if (h_list.empty()) throw InvalidArgument("h_list is empty");
  if (replicas < 2) throw InvalidArgument("variance check needs at least two replicas");
  const auto r = regression_from_string(cfg.regression);
  const auto g = DensityModel::truncated_normal(cfg.process.c);
  std::vector<std::vector<double>> est(replicas, std::vector<double>(h_list.size()));
  parallel_for(replicas, workers, [&](std::size_t j) {
    const auto s = generate_sample(cfg.process, r, cfg.sigma, cfg.n,
                                   derive_seed(cfg.base_seed, {detail::kVarianceTag, j}));
    for (std::size_t i = 0; i < h_list.size(); ++i) {
      est[j][i] = nw_known_density(s, g, cfg.kernel, h_list[i], x);
    }
  });
  VarianceReport rep;
  rep.x = x;
  rep.n = cfg.n;
  rep.replicas = replicas;
  const double log_n = std::log(static_cast<double>(cfg.n));
  std::vector<double> hs, vs;
  bool loggable = h_list.size() >= 2;
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    std::vector<double> col(replicas);
    for (std::size_t j = 0; j < replicas; ++j) col[j] = est[j][i];
    const auto [var, se] = detail::variance_with_se(col);
    const auto t = constants_table(p, cfg.n, h_list[i]);
    rep.A1 = t.at("A1");
    rep.A2 = t.at("A2");
    const double nh = static_cast<double>(cfg.n) * h_list[i];
    rep.rows.push_back({h_list[i], {var, se, rep.A1 / nh + rep.A2 / std::sqrt(log_n) / nh}});
    hs.push_back(h_list[i]);
    vs.push_back(var);
    if (!(var > 0.0)) loggable = false;
  }
  if (loggable) rep.slope = loglog_slope(hs, vs);
  return rep;
}

// -------------------------------------------------------------------- rate

struct RateRow {
  std::size_t n = 0;
  double h_star = 0.0;
  double mse = 0.0;
  double se = 0.0;
};

struct RateReport {
  double x = 0.0;
  double beta = 0.0;
  std::size_t replicas = 0;
  std::vector<RateRow> rows;
  double slope = 0.0;

  [[nodiscard]] double target() const { return -2.0 * beta / (2.0 * beta + 1.0); }

  [[nodiscard]] bool decreasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!(rows[i].mse < rows[i - 1].mse)) return false;
    }
    return true;
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"check", "rate"}, {"x", x},           {"beta", beta},
                             {"replicas", replicas}, {"slope", slope}, {"target", target()},
                             {"decreasing", decreasing()}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"n", r.n}, {"h_star", r.h_star}, {"mse", r.mse}, {"se", r.se}});
    }
    return j;
  }
};

/// MSE of r_{h*}(x), h* = n^{-1/(2 beta + 1)}, for each n; slope of log MSE
/// on log n.
inline RateReport check_rate(const StudyConfig& cfg, std::span<const std::size_t> n_list,
                             double x, double beta, std::size_t replicas,
                             std::size_t workers = 1) {
  if (n_list.size() < 3) throw InvalidArgument("rate check needs at least three sample sizes");
  if (replicas < 2) throw InvalidArgument("rate check needs at least two replicas");
  const auto r = regression_from_string(cfg.regression);
  const auto g = DensityModel::truncated_normal(cfg.process.c);
  RateReport rep;
  rep.x = x;
  rep.beta = beta;
  rep.replicas = replicas;
  std::vector<double> ns, ms;
  for (auto n : n_list) {
    const double h = std::pow(static_cast<double>(n), -1.0 / (2.0 * beta + 1.0));
    std::vector<double> sq(replicas);
    parallel_for(replicas, workers, [&](std::size_t j) {
      const auto s = generate_sample(cfg.process, r, cfg.sigma, n,
                                     derive_seed(cfg.base_seed, {detail::kRateTag, n, j}));
      const double e = nw_known_density(s, g, cfg.kernel, h, x) - r(x);
      sq[j] = e * e;
    });
    const double mse = mean(sq);
    rep.rows.push_back({n, h, mse, std::sqrt(sample_variance(sq) / static_cast<double>(replicas))});
    ns.push_back(static_cast<double>(n));
    ms.push_back(mse);
  }
  rep.slope = loglog_slope(ns, ms);
  return rep;
}

// ------------------------------------------------------------------ oracle

struct OracleReport {
  double x = 0.0;
  std::size_t n = 0;
  std::size_t replicas = 0;
  std::vector<double> grid;
  std::vector<double> rmse_fixed;
  std::vector<double> bias_sup;
  double rmse_adaptive = 0.0;
  double best_h = 0.0;
  double ratio = 0.0;
  double max_abs_error = 0.0;
  double literal_rhs = 0.0;

  [[nodiscard]] bool literal_holds() const {
    return rmse_adaptive <= literal_rhs && max_abs_error <= literal_rhs;
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"check", "oracle"},
                             {"x", x},
                             {"n", n},
                             {"replicas", replicas},
                             {"rmse_adaptive", rmse_adaptive},
                             {"best_h", best_h},
                             {"ratio", ratio},
                             {"max_abs_error", max_abs_error},
                             {"literal_rhs", literal_rhs},
                             {"literal_holds", literal_holds()}};
    j["rows"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      j["rows"].push_back({{"h", grid[i]}, {"rmse", rmse_fixed[i]}, {"C_h", bias_sup[i]}});
    }
    return j;
  }
};

/// Runs the full calibrated GL pipeline at x on `replicas` paths and
/// compares its RMSE with the best fixed bandwidth of the same grid. The
/// literal right-hand side min_h (A6 C(h) + A7 (1 + delta_n) sqrt(log n /
/// (nh))) + A8 sqrt(log n / n) uses the constants of p.
inline OracleReport check_oracle_ratio(const StudyConfig& cfg, const TheoryParams& p, double x,
                                       std::size_t replicas, std::size_t workers = 1) {
  cfg.validate();
  p.validate();
  if (replicas < 2) throw InvalidArgument("oracle check needs at least two replicas");
  const auto r = regression_from_string(cfg.regression);
  const auto g = DensityModel::truncated_normal(cfg.process.c);
  const auto grid = build_simulation_grid(cfg.n);
  const auto gammas = build_gamma_grid(cfg.gamma_lo, cfg.gamma_hi, cfg.gamma_count);
  const double truth = r(x);
  std::vector<double> adaptive(replicas);
  std::vector<std::vector<double>> fixed(replicas);
  parallel_for(replicas, workers, [&](std::size_t j) {
    const auto full = generate_sample(cfg.process, r, cfg.sigma, cfg.n + 2 * cfg.q,
                                      derive_seed(cfg.base_seed, {detail::kOracleTag, j}));
    const auto split = make_split(full, cfg.n, cfg.q);
    const auto selector =
        LocalSelector::with_defaults(split.estimation, g, cfg.kernel, cfg.gl_options());
    const double gamma = calibrate_with(selector, holdout_grid(split.holdout), gammas).gamma_star;
    const auto point = selector.prepare(x);
    adaptive[j] = selector.select(point, gamma).estimate - truth;
    fixed[j].resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) fixed[j][i] = point.estimates.single[i] - truth;
  });

  OracleReport rep;
  rep.x = x;
  rep.n = cfg.n;
  rep.replicas = replicas;
  rep.grid = grid.values;
  CompensatedSum ad;
  for (double e : adaptive) {
    ad += e * e;
    rep.max_abs_error = std::max(rep.max_abs_error, std::abs(e));
  }
  const auto reps = static_cast<double>(replicas);
  rep.rmse_adaptive = std::sqrt(ad.value() / reps);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CompensatedSum acc;
    for (std::size_t j = 0; j < replicas; ++j) acc += fixed[j][i] * fixed[j][i];
    rep.rmse_fixed.push_back(std::sqrt(acc.value() / reps));
    if (rep.rmse_fixed.back() < best) {
      best = rep.rmse_fixed.back();
      rep.best_h = grid[i];
    }
  }
  rep.ratio = rep.rmse_adaptive / best;

  const auto t = constants_table(p, cfg.n, grid.largest());
  const double log_n = std::log(static_cast<double>(cfg.n));
  const double dn = delta_n(cfg.n, cfg.delta);
  const double rad = window_radius(cfg.n);
  double rhs = std::numeric_limits<double>::infinity();
  for (double h : grid.values) {
    const double c = exact_bias_sup(r, cfg.kernel, h, x - rad, x + rad);
    rep.bias_sup.push_back(c);
    const double term = t.at("A6") * c +
                        t.at("A7") * (1.0 + dn) * std::sqrt(log_n / (static_cast<double>(cfg.n) * h));
    rhs = std::min(rhs, term);
  }
  rep.literal_rhs = rhs + t.at("A8") * std::sqrt(log_n / static_cast<double>(cfg.n));
  return rep;
}

// --------------------------------------------------------------- bernstein

struct BernsteinRow {
  double t = 0.0;
  BoundCheck check;
};

struct BernsteinReport {
  std::size_t n = 0;
  double h = 0.0;
  double x = 0.0;
  std::size_t replicas = 0;
  double mean_g = 0.0;
  double M_n = 0.0;
  double calA = 0.0;
  double calB = 0.0;
  std::vector<BernsteinRow> rows;

  [[nodiscard]] bool passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.check.pass(); });
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"check", "bernstein"}, {"n", n},        {"h", h},
                             {"x", x},              {"replicas", replicas}, {"mean_G", mean_g},
                             {"M_n", M_n},          {"calA_n", calA},  {"calB_n", calB},
                             {"pass", passed()}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      auto row = glkern::to_json(r.check);
      row["t"] = r.t;
      j["rows"].push_back(row);
    }
    return j;
  }
};

/// exp(-(t^2/2) / (calA + calB^{1/3} t^{5/3})).
inline double bernstein_bound(double t, double calA, double calB) {
  if (t < 0.0) throw InvalidArgument("t must be non-negative");
  return std::exp(-(t * t / 2.0) / (calA + std::cbrt(calB) * std::pow(t, 5.0 / 3.0)));
}

/// Tail of S_n = sum_i (G_i - E G), G = (1/n) Y K_h(x - X) / g(X) 1{|Y| <= M_n},
/// against the Bernstein bound. E G is estimated from `mean_draws`
/// independent draws of (X, eps) from the stationary marginals. When
/// t_list is empty the 0.5, 0.9 and 0.99 quantiles of |S_n| are used.
inline BernsteinReport check_bernstein_tail(const TheoryParams& p, const StudyConfig& cfg, double h,
                                            double x, std::vector<double> t_list,
                                            std::size_t replicas, std::size_t workers = 1,
                                            std::size_t mean_draws = 1'000'000) {
  p.validate();
  detail::require_bandwidth(h, "h");
  if (replicas < 2) throw InvalidArgument("Bernstein check needs at least two replicas");
  if (mean_draws == 0) throw InvalidArgument("mean_draws must be positive");
  const auto r = regression_from_string(cfg.regression);
  const TruncatedNormal tn(cfg.process.c);
  const auto t = constants_table(p, cfg.n, h);
  const double M = t.at("M_n");
  const double nd = static_cast<double>(cfg.n);
  auto G = [&](double xi, double yi) {
    if (std::abs(yi) > M) return 0.0;
    return yi * eval_scaled(cfg.kernel, h, x - xi) / tn.pdf(xi) / nd;
  };

  CompensatedSum eg;
  {
    Engine eng(derive_seed(cfg.base_seed, {detail::kMeanTag}));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> norm(0.0, 1.0);
    for (std::size_t i = 0; i < mean_draws; ++i) {
      const double xi = tn.quantile(unif(eng));
      eg += G(xi, r(xi) + cfg.sigma * norm(eng));
    }
  }
  const double mean_g = eg.value() / static_cast<double>(mean_draws);

  std::vector<double> abs_s(replicas);
  parallel_for(replicas, workers, [&](std::size_t j) {
    const auto s = generate_sample(cfg.process, r, cfg.sigma, cfg.n,
                                   derive_seed(cfg.base_seed, {detail::kBernsteinTag, j}));
    CompensatedSum acc;
    for (std::size_t i = 0; i < s.size(); ++i) acc += G(s.x[i], s.y[i]) - mean_g;
    abs_s[j] = std::abs(acc.value());
  });
  if (t_list.empty()) {
    for (double q : {0.5, 0.9, 0.99}) t_list.push_back(quantile(abs_s, q));
  }

  BernsteinReport rep;
  rep.n = cfg.n;
  rep.h = h;
  rep.x = x;
  rep.replicas = replicas;
  rep.mean_g = mean_g;
  rep.M_n = M;
  rep.calA = t.at("calA_n");
  rep.calB = t.at("calB_n");
  const auto reps = static_cast<double>(replicas);
  for (double tv : t_list) {
    const auto hits = std::count_if(abs_s.begin(), abs_s.end(), [&](double v) { return v >= tv; });
    const double prob = static_cast<double>(hits) / reps;
    rep.rows.push_back(
        {tv, {prob, std::sqrt(prob * (1.0 - prob) / reps), bernstein_bound(tv, rep.calA, rep.calB)}});
  }
  return rep;
}

}  // namespace glkern
