#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "glkern/calibration.hpp"
#include "glkern/gl.hpp"
#include "glkern/mc_study.hpp"

using namespace glkern;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const KernelSpec kGauss{KernelFamily::Gaussian};
const auto kG = DensityModel::truncated_normal(2.0);

RegressionSample sample_of(std::size_t n, double sigma, std::uint64_t seed) {
  return generate_sample(ProcessSpec{}, benchmark_regression, sigma, n, seed);
}

// Leave-one-out CV score of the Gaussian Nadaraya-Watson fit by a plain
// double loop; points tied with the held-out design value are also left out.
double cv_score(const RegressionSample& s, double h) {
  double score = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s.x[j] == s.x[i]) continue;
      const double t = (s.x[j] - s.x[i]) / h;
      num += std::exp(-0.5 * t * t) * s.y[j];
      den += std::exp(-0.5 * t * t);
    }
    if (!(den > 0.0)) return std::numeric_limits<double>::infinity();
    score += (s.y[i] - num / den) * (s.y[i] - num / den);
  }
  return score;
}

std::vector<double> cv_scores(const RegressionSample& s) {
  std::vector<double> out;
  for (double h : build_simulation_grid(s.size()).values) out.push_back(cv_score(s, h));
  return out;
}

std::size_t grid_index(const BandwidthGrid& g, double h) {
  return static_cast<std::size_t>(std::find(g.values.begin(), g.values.end(), h) - g.values.begin());
}

GLContext unit_context(std::size_t n) {
  GLContext ctx;
  ctx.gamma = 2.5;
  ctx.delta_n = 0.1;
  ctx.a1_hat = 1.3;
  ctx.norms = kernel_norms(kGauss);
  ctx.n = n;
  return ctx;
}

}  // namespace

TEST_CASE("theory grid") {
  CHECK_THROWS_AS(build_theory_grid(2000), EmptyGrid);
  CHECK_THROWS_AS(build_theory_grid(1'000'000'000'000ULL), EmptyGrid);
  CHECK_THROWS_AS(build_theory_grid(1), InvalidArgument);

  const auto small = build_theory_grid(2);
  // log 2 < 1: M = 3 and every e^{-i} clears h_min = (log 2)^8 / 2
  REQUIRE(small.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(small[i], WithinRel(std::exp(-double(i)), 1e-15));

  // log n = 40: h_min = 40^8 e^-40, h_max = 1/1600
  const auto n = static_cast<std::uint64_t>(std::exp(40.0));
  const auto grid = build_theory_grid(n);
  REQUIRE_FALSE(grid.empty());
  CHECK(grid.kind == GridKind::Theory);
  const double ln = std::log(static_cast<double>(n));
  for (double h : grid.values) {
    CHECK(h >= std::pow(ln, 8.0) / static_cast<double>(n));
    CHECK(h <= 1.0 / (ln * ln));
    const double i = -std::log(h);
    CHECK_THAT(i, WithinAbs(std::round(i), 1e-9));
  }
  CHECK_NOTHROW(grid.validate());
}

TEST_CASE("simulation grid") {
  const auto g = build_simulation_grid(2000);
  REQUIRE(g.size() == 37);
  CHECK(g[0] == 1.0);
  CHECK_THAT(g.values.back(), WithinAbs(0.02732372245, 1e-10));
  CHECK(build_simulation_grid(3).size() == 11);
  CHECK(build_simulation_grid(1000).size() == 34);
  CHECK(build_simulation_grid(3).largest() == 1.0);
  for (std::size_t j = 0; j < g.size(); ++j) CHECK_THAT(g[j], WithinRel(std::exp(-0.1 * j), 1e-14));
  CHECK_NOTHROW(g.validate());
  CHECK_THROWS_AS(build_simulation_grid(1), InvalidArgument);
  CHECK_THROWS_AS(build_simulation_grid(100, 0.0), InvalidArgument);
  CHECK_THROWS_AS((BandwidthGrid{{0.5, 0.5}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((BandwidthGrid{{}}.validate()), InvalidArgument);
}

TEST_CASE("local empirical constants") {
  const RegressionSample one{{0.2, 1.5}, {-3.0, 10.0}};
  const auto c = local_empirical_constants(one, kG, 0.0);
  CHECK(c.g_inf_hat == kG(0.2));
  CHECK(c.r_sup_hat == 3.0);
  CHECK(c.count == 1);

  const RegressionSample three{{-0.1, 0.0, 0.3}, {1.0, -5.0, 2.0}};
  const auto c3 = local_empirical_constants(three, kG, 0.0);
  CHECK(c3.r_sup_hat == 5.0);
  CHECK(c3.g_inf_hat == kG(0.3));

  // the window is open
  const RegressionSample edge{{0.5, -0.5}, {1.0, 1.0}};
  CHECK_THROWS_AS(local_empirical_constants(edge, kG, 0.0), NoLocalData);
  CHECK_THROWS_AS(local_empirical_constants(one, kG, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("pilot bandwidth matches a brute-force cross-validation scan") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = sample_of(300, 0.5, seed);
    const auto grid = build_simulation_grid(s.size());
    const auto scores = cv_scores(s);
    const double pilot = pilot_bandwidth(s);
    const auto idx = grid_index(grid, pilot);
    REQUIRE(idx < grid.size());
    const double best = *std::min_element(scores.begin(), scores.end());
    CHECK_THAT(scores[idx], WithinRel(best, 1e-9));
  }
}

TEST_CASE("pilot bandwidth of a duplicated sample") {
  const auto s = sample_of(300, 0.5, 4);
  RegressionSample twice = s;
  twice.x.insert(twice.x.end(), s.x.begin(), s.x.end());
  twice.y.insert(twice.y.end(), s.y.begin(), s.y.end());
  const auto grid = build_simulation_grid(twice.size());
  const auto a = grid_index(grid, pilot_bandwidth(s));
  const auto b = grid_index(grid, pilot_bandwidth(twice));
  CHECK((a > b ? a - b : b - a) <= 1);
}

TEST_CASE("noiseless pilot bandwidth is small") {
  const auto s = sample_of(2000, 0.0, 5);
  const auto grid = build_simulation_grid(s.size());
  const auto idx = grid_index(grid, pilot_bandwidth(s));
  CHECK(idx + 5 >= grid.size());
  CHECK_THROWS_AS(pilot_bandwidth(sample_of(9, 0.5, 1)), InsufficientData);
}

TEST_CASE("noise variance estimate") {
  auto flat = sample_of(500, 0.0, 6);
  std::fill(flat.y.begin(), flat.y.end(), 1.25);
  CHECK(estimate_noise_variance(flat, 0.1, kGauss) <= 1e-20);

  NormalStream eta(7);
  RegressionSample white = sample_of(10'000, 0.0, 7);
  for (auto& y : white.y) y = eta();
  const double s2 = estimate_noise(white, kGauss).sigma2;
  CHECK(s2 >= 0.9);
  CHECK(s2 <= 1.1);

  const auto s = sample_of(400, 0.5, 8);
  RegressionSample scaled = s;
  for (auto& y : scaled.y) y *= 2.0;
  CHECK_THAT(estimate_noise_variance(scaled, 0.15, kGauss),
             WithinRel(4.0 * estimate_noise_variance(s, 0.15, kGauss), 1e-12));
  CHECK_THAT(estimate_noise_variance(scaled, 0.15, KernelSpec{KernelFamily::Epanechnikov}),
             WithinRel(4.0 * estimate_noise_variance(s, 0.15, KernelSpec{KernelFamily::Epanechnikov}),
                       1e-12));
}

TEST_CASE("penalty") {
  GLContext ctx = unit_context(1000);
  ctx.a1_hat = 1.0;
  ctx.delta_n = 0.0;
  const double h = std::log(1000.0) / 1000.0;
  CHECK_THAT(penalty_v(ctx, h), WithinAbs(4.4721359550, 1e-9));
  CHECK_THAT(penalty_v1(ctx, h) + penalty_v2(ctx, h), WithinAbs(penalty_v(ctx, h), 1e-12));

  ctx = unit_context(2000);
  for (double hh : {0.03, 0.1, 0.7}) {
    CHECK_THAT(penalty_v(ctx, hh) / penalty_v(ctx, 4 * hh), WithinAbs(2.0, 1e-12));
  }
  const auto hs = logspace(0.01, 1.0, 50);
  GLContext bigger = ctx;
  bigger.gamma = 3.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    if (i > 0) CHECK(penalty_v(ctx, hs[i]) < penalty_v(ctx, hs[i - 1]));
    CHECK(penalty_v(bigger, hs[i]) > penalty_v(ctx, hs[i]));
  }
  CHECK_THROWS_AS(penalty_v(ctx, 0.0), InvalidArgument);
}

TEST_CASE("delta_n") {
  const auto n = static_cast<std::size_t>(std::llround(std::exp(10.0)));
  CHECK_THAT(delta_n(n, DeltaExponent::Theory), WithinAbs(0.6309573445, 1e-5));
  CHECK_THAT(delta_n(n, DeltaExponent::Simulation), WithinAbs(1.5848931925, 1e-5));
}

TEST_CASE("make_context arithmetic") {
  const auto norms = kernel_norms(kGauss);
  CHECK_THAT(a1_constant(0.4, 2.0, 0.25, norms), WithinAbs(2.9972, 1e-3));
  CHECK_THAT(a1_constant(0.4, 4.0, 0.0, norms), WithinRel(4.0 * a1_constant(0.4, 2.0, 0.0, norms), 1e-14));

  const auto s = sample_of(500, 0.5, 9);
  const auto ctx = make_context(s, kG, kGauss, 0.1, 0.02, {}, 0.3);
  const auto local = local_empirical_constants(s, kG, 0.1);
  CHECK(ctx.gamma == 0.02);
  CHECK(ctx.n == 500);
  CHECK(ctx.delta_n == delta_n(500, DeltaExponent::Theory));
  CHECK_THAT(ctx.a1_hat, WithinRel((local.r_sup_hat * local.r_sup_hat + 0.3) * norms.l2 *
                                       norms.l2 / local.g_inf_hat,
                                   1e-14));
  CHECK_FALSE(ctx.theory_regime());
  const auto sim = make_context(s, kG, kGauss, 0.1, 2.5, {0.5, DeltaExponent::Simulation});
  CHECK(sim.theory_regime());
  CHECK(sim.delta_n == delta_n(500, DeltaExponent::Simulation));
  CHECK_THROWS_AS(make_context(s, kG, kGauss, 0.1, 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_context(s, kG, kGauss, 5.0, 1.0), NoLocalData);
}

TEST_CASE("proxy A against a hand-rolled double loop") {
  const RegressionSample s{{-0.3, 0.1, 0.4}, {1.0, -2.0, 0.5}};
  const BandwidthGrid grid{{0.5, 0.2}};
  GLContext ctx = unit_context(3);
  ctx.a1_hat = 1e-4;
  for (double h : grid.values) {
    double expected = 0.0;
    for (double hp : grid.values) {
      double aux = 0.0, single = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        const double d = s.x[k] - 0.05;
        const double sc = std::sqrt(h * h + hp * hp);
        aux += s.y[k] * normal::pdf(d / sc) / sc / kG(s.x[k]) / 3.0;
        single += s.y[k] * normal::pdf(d / hp) / hp / kG(s.x[k]) / 3.0;
      }
      expected = std::max(expected, std::abs(aux - single) - penalty_v(ctx, hp));
    }
    CHECK_THAT(proxy_a(s, kG, kGauss, ctx, grid, h, 0.05), WithinAbs(expected, 1e-12));
  }

  ctx.a1_hat = 1e6;
  CHECK(proxy_a(s, kG, kGauss, ctx, BandwidthGrid{{0.3}}, 0.3, 0.0) == 0.0);
  RegressionSample zero = s;
  std::fill(zero.y.begin(), zero.y.end(), 0.0);
  ctx.a1_hat = 1e-4;
  CHECK(proxy_a(zero, kG, kGauss, ctx, grid, 0.2, 0.0) == 0.0);
  CHECK_THROWS_AS(proxy_a(s, kG, kGauss, ctx, BandwidthGrid{}, 0.2, 0.0), InvalidArgument);
}

TEST_CASE("Gaussian fast path agrees with the direct estimators") {
  const auto s = sample_of(800, 0.5, 10);
  const auto grid = build_simulation_grid(s.size());
  for (double x : {-0.9, 0.0, 0.35}) {
    const auto est = compute_point_estimates(s, kG, kGauss, grid, x);
    REQUIRE(est.size() == grid.size());
    for (std::size_t j = 0; j < grid.size(); j += 3) {
      CHECK_THAT(est.single[j], WithinAbs(nw_known_density(s, kG, kGauss, grid[j], x), 1e-10));
      for (std::size_t i = 0; i < grid.size(); i += 5) {
        CHECK_THAT(est.pair(i, j), WithinAbs(aux_estimate(s, kG, kGauss, grid[i], grid[j], x), 1e-10));
        CHECK(est.pair(i, j) == est.pair(j, i));
      }
    }
    GLContext ctx = unit_context(s.size());
    ctx.a1_hat = 0.05;
    const auto sel = select_bandwidth(s, kG, kGauss, ctx, grid, x);
    for (std::size_t i = 0; i < grid.size(); i += 4) {
      CHECK_THAT(sel.table[i].a, WithinAbs(proxy_a(s, kG, kGauss, ctx, grid, grid[i], x), 1e-9));
    }
  }
}

TEST_CASE("selection with zero responses takes the largest bandwidth") {
  auto s = sample_of(300, 0.5, 11);
  std::fill(s.y.begin(), s.y.end(), 0.0);
  const auto grid = build_simulation_grid(s.size());
  const auto sel = select_bandwidth(s, kG, kGauss, unit_context(s.size()), grid, 0.0);
  CHECK(sel.h_hat == 1.0);
  CHECK(sel.estimate == 0.0);
  for (const auto& row : sel.table) CHECK(row.a == 0.0);
}

TEST_CASE("noiseless benchmark forces a refined bandwidth") {
  StudyConfig cfg;
  cfg.n = 2000;
  cfg.sigma = 0.0;
  const auto rep = run_replica(cfg, 1);
  const auto grid = evaluation_grid(cfg.s);
  const auto mid = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), 0.0) - grid.begin());
  REQUIRE(mid < grid.size());
  CHECK(rep.h_hats[mid] < 1.0);
}

TEST_CASE("selection table covers the grid") {
  const auto s = sample_of(2000, 0.0, 12);
  const auto grid = build_simulation_grid(s.size());
  const auto ctx = make_context(s, kG, kGauss, 0.0, 1e-3);
  const auto sel = select_bandwidth(s, kG, kGauss, ctx, grid, 0.0);
  REQUIRE(sel.table.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(sel.table[i].h == grid[i]);
    CHECK(sel.table[i].a >= 0.0);
    CHECK(sel.table[i].total == sel.table[i].a + sel.table[i].v);
    CHECK(sel.table[sel.index].total <= sel.table[i].total);
  }
  CHECK(grid[sel.index] == sel.h_hat);
  CHECK_THAT(sel.estimate, WithinAbs(nw_known_density(s, kG, kGauss, sel.h_hat, 0.0), 1e-12));
}

TEST_CASE("selection does not depend on grid enumeration order") {
  const auto s = sample_of(600, 0.5, 13);
  const auto grid = build_simulation_grid(s.size());
  const auto est = compute_point_estimates(s, kG, kGauss, grid, 0.2);
  const std::size_t m = grid.size();
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + 7, perm.end());
  BandwidthGrid g2;
  PointEstimates e2{est.x, std::vector<double>(m), std::vector<double>(m * m)};
  for (std::size_t i = 0; i < m; ++i) {
    g2.values.push_back(grid[perm[i]]);
    e2.single[i] = est.single[perm[i]];
    for (std::size_t j = 0; j < m; ++j) e2.aux[i * m + j] = est.pair(perm[i], perm[j]);
  }
  for (double gamma : {1e-6, 1e-3, 0.05, 2.5}) {
    GLContext ctx = unit_context(m);
    ctx.n = s.size();
    ctx.gamma = gamma;
    ctx.a1_hat = 1.0;
    CHECK(select_from_estimates(est, grid, ctx).h_hat == select_from_estimates(e2, g2, ctx).h_hat);
  }
  // exact ties go to the larger bandwidth in either order
  PointEstimates flat{0.0, std::vector<double>(m, 0.0), std::vector<double>(m * m, 0.0)};
  GLContext huge = unit_context(s.size());
  CHECK(select_from_estimates(flat, g2, huge).h_hat == 1.0);
}

TEST_CASE("selected bandwidth grows with gamma") {
  const auto gammas = build_gamma_grid(5e-8, 0.05, 21);
  std::size_t violations = 0;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto s = sample_of(1000, 0.5, seed);
    const auto sel = LocalSelector::with_defaults(s, kG, kGauss, {0.5, DeltaExponent::Simulation});
    for (double x : {-0.5, 0.0, 0.5}) {
      const auto p = sel.prepare(x);
      double last = 0.0;
      for (double gamma : gammas) {
        const double h = sel.select(p, gamma).h_hat;
        if (h < last) ++violations;
        last = h;
      }
    }
  }
  if (violations > 0) WARN("monotone-gamma heuristic violated " << violations << " times");
  SUCCEED();
}

TEST_CASE("local selector matches the one-shot pipeline") {
  const auto s = sample_of(700, 0.5, 14);
  const GLOptions opt{0.5, DeltaExponent::Simulation};
  const auto sel = LocalSelector::with_defaults(s, kG, kGauss, opt);
  const auto p = sel.prepare(0.25);
  const auto ctx = make_context(s, kG, kGauss, 0.25, 0.01, opt, sel.sigma2_hat());
  CHECK_THAT(sel.context(p, 0.01).a1_hat, WithinRel(ctx.a1_hat, 1e-14));
  const auto one = select_bandwidth(s, kG, kGauss, ctx, sel.grid(), 0.25);
  const auto two = sel.select(p, 0.01);
  CHECK(one.h_hat == two.h_hat);
  CHECK(one.estimate == two.estimate);
  CHECK_THROWS_AS(sel.select(p, -1.0), InvalidArgument);
}
