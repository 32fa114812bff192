#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "glkern/calibration.hpp"
#include "glkern/dgp.hpp"
#include "glkern/estimator.hpp"
#include "glkern/gl.hpp"
#include "glkern/io.hpp"
#include "glkern/kernels.hpp"
#include "glkern/numeric.hpp"
#include "glkern/parallel.hpp"
#include "glkern/rng.hpp"

namespace glkern {

/// One (n, sigma) cell of the Monte Carlo experiment.
struct StudyConfig {
  std::size_t n = 1000;
  std::size_t q = 100;
  double sigma = 0.5;
  std::size_t replicas = 50;
  std::size_t s = 21;
  std::uint64_t base_seed = 20240601;
  double gamma_lo = 5e-8;
  double gamma_hi = 0.05;
  std::size_t gamma_count = 21;
  KernelSpec kernel{};
  ProcessSpec process{};
  DeltaExponent delta = DeltaExponent::Simulation;
  double half_width = 0.5;
  std::string regression = "benchmark";

  void validate() const {
    if (n < 10) throw InvalidArgument("study needs n >= 10");
    if (q == 0) throw InvalidArgument("study needs q >= 1");
    if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
    if (replicas == 0) throw InvalidArgument("study needs at least one replica");
    if (s < 2) throw InvalidArgument("evaluation grid needs s >= 2");
    process.validate();
  }

  [[nodiscard]] GLOptions gl_options() const { return {half_width, delta}; }
};

/// x_i = -1 + 2 (i - 1) / (s - 1), i = 1..s.
inline std::vector<double> evaluation_grid(std::size_t s) {
  if (s < 2) throw InvalidArgument("evaluation grid needs s >= 2");
  return linspace(-1.0, 1.0, s);
}

/// Trapezoid weights on the evaluation grid: 1/(s-1) at the ends and
/// 2/(s-1) inside (0.05 and 0.1 at s = 21); they sum to 2.
inline std::vector<double> evaluation_weights(std::size_t s) {
  if (s < 2) throw InvalidArgument("evaluation grid needs s >= 2");
  const double cell = 2.0 / static_cast<double>(s - 1);
  std::vector<double> d(s, cell);
  d.front() = d.back() = cell / 2.0;
  return d;
}

/// Seed of replica `index`. Depends on n but not on sigma, so cells that
/// differ only in noise level share design paths and noise draws.
inline std::uint64_t replica_seed(const StudyConfig& cfg, std::size_t index) {
  return derive_seed(cfg.base_seed, {static_cast<std::uint64_t>(index),
                                     static_cast<std::uint64_t>(cfg.n)});
}

struct ReplicaResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double gamma_star = 0.0;
  std::vector<double> estimates;
  std::vector<double> h_hats;
  double integrated_error = 0.0;
};

/// Weighted integrated squared error sum_i d_i (r(x_i) - est_i)^2.
inline double integrated_error(const RegressionFunction& r, std::span<const double> grid,
                               std::span<const double> weights, std::span<const double> est) {
  CompensatedSum acc;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double e = r(grid[i]) - est[i];
    acc += weights[i] * e * e;
  }
  return acc.value();
}

/// Simulate n + 2q points, calibrate gamma on the holdout block, then run
/// GL selection at every evaluation point with the calibrated gamma.
inline ReplicaResult run_replica(const StudyConfig& cfg, std::size_t replica_index) {
  cfg.validate();
  if (replica_index < 1) throw InvalidArgument("replica indices start at 1");
  ReplicaResult out;
  out.index = replica_index;
  out.seed = replica_seed(cfg, replica_index);
  try {
    const auto r = regression_from_string(cfg.regression);
    const auto full = generate_sample(cfg.process, r, cfg.sigma, cfg.n + 2 * cfg.q, out.seed);
    const auto split = make_split(full, cfg.n, cfg.q);
    const auto g = DensityModel::truncated_normal(cfg.process.c);
    const auto selector =
        LocalSelector::with_defaults(split.estimation, g, cfg.kernel, cfg.gl_options());
    const auto pairs = holdout_grid(split.holdout);
    const auto gammas = build_gamma_grid(cfg.gamma_lo, cfg.gamma_hi, cfg.gamma_count);
    out.gamma_star = calibrate_with(selector, pairs, gammas).gamma_star;

    const auto grid = evaluation_grid(cfg.s);
    out.estimates.resize(grid.size());
    out.h_hats.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto sel = selector.select(selector.prepare(grid[i]), out.gamma_star);
      out.estimates[i] = sel.estimate;
      out.h_hats[i] = sel.h_hat;
    }
    out.integrated_error = integrated_error(r, grid, evaluation_weights(cfg.s), out.estimates);
  } catch (const std::exception& e) {
    throw std::runtime_error("replica " + std::to_string(replica_index) + " (seed " +
                             std::to_string(out.seed) + ") failed: " + e.what());
  }
  return out;
}

struct StudyReport {
  StudyConfig config;
  std::vector<double> grid;
  std::vector<double> mse;
  double mise = 0.0;
  std::vector<double> integrated_errors;
  std::vector<std::vector<double>> selected_h;  // replica x grid point
  std::vector<double> gamma_star;

  [[nodiscard]] double median_integrated_error() const { return median(integrated_errors); }
};

/// Runs every replica (possibly concurrently) and folds them in index order.
inline StudyReport run_study(const StudyConfig& cfg, std::size_t workers = 1) {
  cfg.validate();
  std::vector<ReplicaResult> results(cfg.replicas);
  parallel_for(cfg.replicas, workers, [&](std::size_t i) { results[i] = run_replica(cfg, i + 1); });

  StudyReport rep;
  rep.config = cfg;
  rep.grid = evaluation_grid(cfg.s);
  const auto r = regression_from_string(cfg.regression);
  std::vector<CompensatedSum> sq(cfg.s);
  CompensatedSum total;
  for (const auto& res : results) {
    for (std::size_t i = 0; i < cfg.s; ++i) {
      const double e = r(rep.grid[i]) - res.estimates[i];
      sq[i] += e * e;
    }
    total += res.integrated_error;
    rep.integrated_errors.push_back(res.integrated_error);
    rep.selected_h.push_back(res.h_hats);
    rep.gamma_star.push_back(res.gamma_star);
  }
  const auto reps = static_cast<double>(cfg.replicas);
  rep.mse.resize(cfg.s);
  for (std::size_t i = 0; i < cfg.s; ++i) rep.mse[i] = sq[i].value() / reps;
  rep.mise = total.value() / reps;
  return rep;
}

/// Writes mse.csv, mise.csv, integrated_errors.csv, selected_h.csv and the
/// provenance document config.json into `dir`.
inline void export_report(const std::vector<StudyReport>& reports, const std::filesystem::path& dir,
                          const nlohmann::json& provenance) {
  std::string mse = "sigma,n,x,mse\n";
  std::string mise = "sigma,n,mise\n";
  std::string ie = "sigma,n,replica,I\n";
  std::string sel = "sigma,n,replica,x,h_hat,gamma_star\n";
  for (const auto& rep : reports) {
    const std::string cell = io::num(rep.config.sigma) + ',' + std::to_string(rep.config.n) + ',';
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
      mse += cell + io::num(rep.grid[i]) + ',' + io::num(rep.mse[i]) + '\n';
    }
    mise += cell + io::num(rep.mise) + '\n';
    for (std::size_t j = 0; j < rep.integrated_errors.size(); ++j) {
      ie += cell + std::to_string(j + 1) + ',' + io::num(rep.integrated_errors[j]) + '\n';
      for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        sel += cell + std::to_string(j + 1) + ',' + io::num(rep.grid[i]) + ',' +
               io::num(rep.selected_h[j][i]) + ',' + io::num(rep.gamma_star[j]) + '\n';
      }
    }
  }
  io::write_file(dir / "mse.csv", mse);
  io::write_file(dir / "mise.csv", mise);
  io::write_file(dir / "integrated_errors.csv", ie);
  io::write_file(dir / "selected_h.csv", sel);
  io::write_file(dir / "config.json", provenance.dump(2) + "\n");
}

}  // namespace glkern
