#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "glkern/dgp.hpp"
#include "glkern/errors.hpp"
#include "glkern/gl.hpp"
#include "glkern/kernels.hpp"
#include "glkern/mc_study.hpp"

namespace glkern {

inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// Everything a command-line run depends on. Serialised next to every
/// output so the run can be repeated exactly.
struct RunConfig {
  std::string command;
  std::uint64_t seed = kDefaultSeed;
  std::size_t workers = 0;
  std::string out = "glkern-out";

  // model
  double phi = 0.75;
  double rho = 1.0;
  double c = 2.0;
  std::string regression = "benchmark";
  std::string kernel = "gaussian";
  double sigma = 0.5;
  std::size_t n = 1000;

  // simulate
  std::size_t acf_lags = 0;

  // estimate / calibrate
  std::string input;
  std::vector<double> x = {};
  double h = 0.0;
  bool adaptive = false;
  double gamma = 0.0;
  bool table = false;
  std::size_t q = 100;
  std::string delta = "simulation";
  double half_width = 0.5;

  // calibrate / study
  double gamma_lo = 5e-8;
  double gamma_hi = 0.05;
  std::size_t gamma_count = 21;
  std::vector<std::size_t> ns = {1000, 2000};
  std::vector<double> sigmas = {0.1, 0.5, 1.0};
  std::size_t replicas = 50;
  std::size_t s = 21;

  // check / constants
  std::string which = "all";
  double a = 0.75;
  double beta = 2.0;
  double L = 1.0;
  double theory_gamma = 2.5;
  double x0 = 0.0;
  std::size_t check_replicas = 0;

  [[nodiscard]] ProcessSpec process() const { return {phi, rho, c}; }

  [[nodiscard]] DeltaExponent delta_exponent() const {
    if (delta == "theory") return DeltaExponent::Theory;
    if (delta == "simulation") return DeltaExponent::Simulation;
    throw InvalidArgument("delta must be 'theory' or 'simulation'");
  }

  [[nodiscard]] GLOptions gl_options() const { return {half_width, delta_exponent()}; }

  /// Study cell for (n, sigma) with every other field taken from this run.
  [[nodiscard]] StudyConfig study(std::size_t cell_n, double cell_sigma) const {
    StudyConfig cfg;
    cfg.n = cell_n;
    cfg.q = q;
    cfg.sigma = cell_sigma;
    cfg.replicas = replicas;
    cfg.s = s;
    cfg.base_seed = seed;
    cfg.gamma_lo = gamma_lo;
    cfg.gamma_hi = gamma_hi;
    cfg.gamma_count = gamma_count;
    cfg.kernel = kernel_from_string(kernel);
    cfg.process = process();
    cfg.delta = delta_exponent();
    cfg.half_width = half_width;
    cfg.regression = regression;
    return cfg;
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RunConfig, command, seed, workers, out, phi, rho, c,
                                                regression, kernel, sigma, n, acf_lags, input, x, h,
                                                adaptive, gamma, table, q, delta, half_width,
                                                gamma_lo, gamma_hi, gamma_count, ns, sigmas,
                                                replicas, s, which, a, beta, L, theory_gamma, x0,
                                                check_replicas)

inline std::string to_text(const RunConfig& cfg) { return nlohmann::json(cfg).dump(2) + "\n"; }

/// Parses a configuration document; absent keys keep their defaults and
/// unknown keys are rejected.
inline RunConfig run_config_from_text(const std::string& text, RunConfig base = {}) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("configuration must be a JSON object");
  const nlohmann::json known = base;
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) {
      throw InvalidArgument("unknown configuration key '" + item.key() + "'");
    }
  }
  nlohmann::json merged = known;
  merged.update(j);
  try {
    return merged.get<RunConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("configuration has a badly typed value: ") + e.what());
  }
}

/// Seed from GLKERN_SEED when set, otherwise `fallback`.
inline std::uint64_t seed_from_env(std::uint64_t fallback) {
  const char* v = std::getenv("GLKERN_SEED");
  if (v == nullptr || *v == '\0') return fallback;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(v, &used);
    if (used != std::string(v).size()) throw std::invalid_argument("trailing characters");
    return s;
  } catch (const std::exception&) {
    throw InvalidArgument(std::string("GLKERN_SEED is not an unsigned integer: ") + v);
  }
}

}  // namespace glkern
