// Simulates one path, calibrates gamma on a held-out block and prints the
// selected bandwidth and estimate at a few points.
#include <cstdio>

#include "glkern/glkern.hpp"

int main() {
  using namespace glkern;
  const ProcessSpec process{};
  const std::size_t n = 1000, q = 100;
  const auto full = generate_sample(process, benchmark_regression, 0.5, n + 2 * q, 42);
  const auto split = make_split(full, n, q);
  const auto g = DensityModel::truncated_normal(process.c);
  const KernelSpec k{};
  const GLOptions opt{0.5, DeltaExponent::Simulation};

  const auto selector = LocalSelector::with_defaults(split.estimation, g, k, opt);
  const auto gammas = build_gamma_grid(5e-8, 0.05, 21);
  const double gamma = calibrate_with(selector, holdout_grid(split.holdout), gammas).gamma_star;
  std::printf("gamma* = %.3g, sigma^2 estimate = %.4f\n", gamma, selector.sigma2_hat());

  std::printf("%8s %10s %10s %10s\n", "x", "h_hat", "estimate", "r(x)");
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const auto sel = selector.select(selector.prepare(x), gamma);
    std::printf("%8.2f %10.4f %10.4f %10.4f\n", x, sel.h_hat, sel.estimate,
                benchmark_regression(x));
  }
}
