#include <cstdio>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glkern/glkern.hpp"

namespace fs = std::filesystem;
using namespace glkern;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

void write_provenance(const RunConfig& cfg) {
  io::write_file(fs::path(cfg.out) / "config.json", to_text(cfg));
}

RegressionSample load_or_simulate(const RunConfig& cfg, std::size_t length) {
  if (!cfg.input.empty()) return io::read_sample_csv(cfg.input);
  return generate_sample(cfg.process(), regression_from_string(cfg.regression), cfg.sigma, length,
                         cfg.seed);
}

std::vector<double> evaluation_points(const RunConfig& cfg) {
  return cfg.x.empty() ? evaluation_grid(cfg.s) : cfg.x;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto sample = generate_sample(cfg.process(), regression_from_string(cfg.regression),
                                      cfg.sigma, cfg.n, cfg.seed);
  write_provenance(cfg);
  io::write_file(fs::path(cfg.out) / "sample.csv", io::sample_csv(sample));
  if (cfg.acf_lags > 0) {
    const auto acf = sample_autocorrelation(sample.x, cfg.acf_lags);
    std::string text = "lag,acf\n";
    for (std::size_t k = 0; k < acf.size(); ++k) {
      text += std::to_string(k + 1) + ',' + io::num(acf[k]) + '\n';
    }
    io::write_file(fs::path(cfg.out) / "acf.csv", text);
  }
  std::cout << "wrote " << sample.size() << " observations to "
            << (fs::path(cfg.out) / "sample.csv").string() << "\n";
  return kExitOk;
}

int cmd_estimate(const RunConfig& cfg) {
  const auto sample = load_or_simulate(cfg, cfg.n);
  const auto g = DensityModel::truncated_normal(cfg.c);
  const auto k = kernel_from_string(cfg.kernel);
  const auto xs = evaluation_points(cfg);
  std::string text;
  if (cfg.adaptive) {
    if (!(cfg.gamma > 0.0)) throw UsageError("--adaptive needs a positive --gamma");
    const auto selector = LocalSelector::with_defaults(sample, g, k, cfg.gl_options());
    text = "x,h_hat,estimate,gamma\n";
    std::string table = "x,h,A,V\n";
    for (double x : xs) {
      const auto sel = selector.select(selector.prepare(x), cfg.gamma);
      text += io::num(x) + ',' + io::num(sel.h_hat) + ',' + io::num(sel.estimate) + ',' +
              io::num(cfg.gamma) + '\n';
      for (const auto& row : sel.table) {
        table += io::num(x) + ',' + io::num(row.h) + ',' + io::num(row.a) + ',' + io::num(row.v) +
                 '\n';
      }
    }
    if (cfg.table) io::write_file(fs::path(cfg.out) / "selection.csv", table);
  } else {
    if (!(cfg.h > 0.0)) throw UsageError("give a positive --h or use --adaptive");
    text = "x,h,estimate\n";
    for (double x : xs) {
      text += io::num(x) + ',' + io::num(cfg.h) + ',' + io::num(nw_known_density(sample, g, k, cfg.h, x)) +
              '\n';
    }
  }
  write_provenance(cfg);
  io::write_file(fs::path(cfg.out) / "estimates.csv", text);
  std::cout << text;
  return kExitOk;
}

int cmd_calibrate(const RunConfig& cfg) {
  const auto full = load_or_simulate(cfg, cfg.n + 2 * cfg.q);
  if (full.size() <= 2 * cfg.q) throw UsageError("input is shorter than 2q + 1 observations");
  const auto split = make_split(full, full.size() - 2 * cfg.q, cfg.q);
  const auto gammas = build_gamma_grid(cfg.gamma_lo, cfg.gamma_hi, cfg.gamma_count);
  const auto res = calibrate(split, gammas, DensityModel::truncated_normal(cfg.c),
                             kernel_from_string(cfg.kernel), cfg.gl_options(), cfg.workers);
  std::string text = "gamma,error\n";
  for (std::size_t i = 0; i < res.gammas.size(); ++i) {
    text += io::num(res.gammas[i]) + ',' + io::num(res.errors[i]) + '\n';
  }
  write_provenance(cfg);
  io::write_file(fs::path(cfg.out) / "calibration.csv", text);
  std::cout << "gamma_star " << io::num(res.gamma_star) << "\n";
  return kExitOk;
}

int cmd_study(const RunConfig& cfg) {
  if (cfg.ns.empty() || cfg.sigmas.empty()) throw UsageError("study needs at least one n and sigma");
  std::vector<StudyReport> reports;
  for (double sigma : cfg.sigmas) {
    for (auto n : cfg.ns) {
      reports.push_back(run_study(cfg.study(n, sigma), cfg.workers));
      const auto& rep = reports.back();
      std::cout << "sigma=" << io::num(sigma) << " n=" << n << " MISE=" << io::num(rep.mise)
                << " median=" << io::num(rep.median_integrated_error()) << "\n";
    }
  }
  export_report(reports, cfg.out, nlohmann::json(cfg));
  return kExitOk;
}

int cmd_check(const RunConfig& cfg) {
  std::vector<std::string> names;
  if (cfg.which == "all") {
    names = check_names();
  } else {
    names = {cfg.which};
  }
  write_provenance(cfg);
  bool all_pass = true;
  for (const auto& name : names) {
    const auto outcome = run_check(name, cfg);
    io::write_file(fs::path(cfg.out) / (name + ".json"), outcome.report.dump(2) + "\n");
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << "\n";
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_constants(const RunConfig& cfg) {
  const auto outcome = run_check_constants(cfg);
  write_provenance(cfg);
  io::write_file(fs::path(cfg.out) / "constants.json", outcome.report.dump(2) + "\n");
  for (const auto& [name, value] : outcome.report["constants"].items()) {
    std::cout << name << ' ' << (value.is_number() ? io::num(value.get<double>()) : value.get<std::string>())
              << "\n";
  }
  return outcome.pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  std::string config_path;
  try {
    cfg.seed = seed_from_env(kDefaultSeed);
    config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) cfg = run_config_from_text(io::read_file(config_path), cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"Adaptive pointwise kernel regression with Goldenshluger-Lepski bandwidths"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", config_path, "JSON configuration; command-line flags override it");
  app.add_option("--seed", cfg.seed, "Master seed (falls back to GLKERN_SEED)");
  app.add_option("--workers", cfg.workers, "Worker threads, 0 for all cores");
  app.add_option("--out", cfg.out, "Output directory");

  auto model_opts = [&](CLI::App* sub) {
    sub->add_option("--sigma", cfg.sigma, "Noise standard deviation");
    sub->add_option("--phi", cfg.phi, "AR(1) coefficient");
    sub->add_option("--rho", cfg.rho, "AR(1) innovation scale");
    sub->add_option("--c", cfg.c, "Design truncation half-width");
    sub->add_option("--regression", cfg.regression, "benchmark, sin, zero or linear");
    sub->add_option("--kernel", cfg.kernel, "gaussian, epanechnikov or uniform");
  };
  auto gl_opts = [&](CLI::App* sub) {
    sub->add_option("--delta", cfg.delta, "Exponent sign of delta_n: theory or simulation")
        ->check(CLI::IsMember({"theory", "simulation"}));
    sub->add_option("--half-width", cfg.half_width, "Half-width of the plug-in window");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate a regression sample on the AR(1) design");
  simulate->add_option("--n", cfg.n, "Number of observations");
  simulate->add_option("--acf-lags", cfg.acf_lags, "Also write the design autocorrelation");
  model_opts(simulate);

  auto* estimate = app.add_subcommand("estimate", "Kernel estimates at fixed or selected bandwidths");
  estimate->add_option("--input", cfg.input, "CSV with x and y columns (simulated when absent)");
  estimate->add_option("--n", cfg.n, "Simulated sample size");
  estimate->add_option("--x", cfg.x, "Evaluation points (default: 21-point grid on [-1, 1])");
  estimate->add_option("--h", cfg.h, "Fixed bandwidth");
  estimate->add_flag("--adaptive", cfg.adaptive, "Select the bandwidth at each point");
  estimate->add_option("--gamma", cfg.gamma, "Penalty calibration constant");
  estimate->add_flag("--table", cfg.table, "Write the per-bandwidth selection table");
  model_opts(estimate);
  gl_opts(estimate);

  auto* calib = app.add_subcommand("calibrate", "Choose gamma on a held-out block");
  calib->add_option("--input", cfg.input, "CSV with n + 2q rows (simulated when absent)");
  calib->add_option("--n", cfg.n, "Estimation block size for simulated data");
  calib->add_option("--q", cfg.q, "Gap and holdout block size");
  calib->add_option("--gamma-lo", cfg.gamma_lo);
  calib->add_option("--gamma-hi", cfg.gamma_hi);
  calib->add_option("--gamma-count", cfg.gamma_count);
  model_opts(calib);
  gl_opts(calib);

  bool full = false;
  auto* study = app.add_subcommand("study", "Monte Carlo MISE study over (sigma, n) cells");
  study->add_option("--n", cfg.ns, "Sample sizes (repeatable)");
  study->add_option("--sigma", cfg.sigmas, "Noise levels (repeatable)");
  study->add_option("--replicas", cfg.replicas, "Replicas per cell");
  study->add_flag("--full", full, "Use 500 replicas per cell");
  study->add_option("--q", cfg.q, "Gap and holdout block size");
  study->add_option("--s", cfg.s, "Evaluation grid size");
  study->add_option("--gamma-lo", cfg.gamma_lo);
  study->add_option("--gamma-hi", cfg.gamma_hi);
  study->add_option("--gamma-count", cfg.gamma_count);
  study->add_option("--phi", cfg.phi, "AR(1) coefficient");
  study->add_option("--rho", cfg.rho, "AR(1) innovation scale");
  study->add_option("--c", cfg.c, "Design truncation half-width");
  study->add_option("--regression", cfg.regression, "benchmark, sin, zero or linear");
  study->add_option("--kernel", cfg.kernel, "gaussian, epanechnikov or uniform");
  gl_opts(study);

  auto* check = app.add_subcommand("check", "Numerical checks of the finite-sample bounds");
  check->add_option("--which", cfg.which, "Check to run")
      ->check(CLI::IsMember({"lemma-a2", "bias", "variance", "rate", "oracle", "bernstein",
                             "constants", "all"}));
  check->add_option("--replicas", cfg.check_replicas, "Override the Monte Carlo replica count");
  check->add_option("--a", cfg.a, "Geometric mixing rate in (0, 1)");
  check->add_option("--theory-gamma", cfg.theory_gamma, "gamma used in the oracle constants");
  model_opts(check);

  auto* constants = app.add_subcommand("constants", "Print the constants of the bounds");
  constants->add_option("--n", cfg.n, "Sample size");
  constants->add_option("--x", cfg.x0, "Evaluation point");
  constants->add_option("--a", cfg.a, "Geometric mixing rate in (0, 1)");
  constants->add_option("--beta", cfg.beta, "Smoothness index");
  constants->add_option("--L", cfg.L, "Holder constant when r is affine");
  constants->add_option("--theory-gamma", cfg.theory_gamma, "gamma entering B10");
  model_opts(constants);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (full) cfg.replicas = 500;

  try {
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    (void)kernel_from_string(cfg.kernel);
    (void)cfg.delta_exponent();
    (void)regression_from_string(cfg.regression);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "estimate") return cmd_estimate(cfg);
    if (cfg.command == "calibrate") return cmd_calibrate(cfg);
    if (cfg.command == "study") return cmd_study(cfg);
    if (cfg.command == "check") return cmd_check(cfg);
    if (cfg.command == "constants") return cmd_constants(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
