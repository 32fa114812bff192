#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "glkern/dgp.hpp"

using namespace glkern;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Kolmogorov-Smirnov distance between the empirical law of v and cdf.
template <class Cdf>
double ks_statistic(std::vector<double> v, const Cdf& cdf) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = cdf(v[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Independent stationary draws pushed through the transform.
std::vector<double> iid_design(const ProcessSpec& spec, std::size_t n, std::uint64_t seed) {
  NormalStream z(seed);
  std::vector<double> latent(n);
  const double sd = std::sqrt(spec.latent_variance());
  for (auto& v : latent) v = sd * z();
  return transform_to_x(latent, spec);
}

}  // namespace

TEST_CASE("process spec validation") {
  CHECK_NOTHROW(ProcessSpec{}.validate());
  CHECK_THROWS_AS((ProcessSpec{1.0, 1.0, 2.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS((ProcessSpec{-1.2, 1.0, 2.0}.validate()), InvalidArgument);
  CHECK_THROWS_AS(simulate_ar1(ProcessSpec{1.0, 1.0, 2.0}, 10, 1), InvalidArgument);
  CHECK_THAT(ProcessSpec{}.latent_variance(), WithinAbs(1.0 / (1.0 - 0.5625), 1e-15));
}

TEST_CASE("AR(1) path has the stationary variance") {
  const auto z = simulate_ar1(ProcessSpec{}, 1'000'000, 11);
  CHECK_THAT(sample_variance(z), WithinRel(2.2857142857, 0.02));
}

TEST_CASE("AR(1) with phi = 0 is uncorrelated") {
  const auto z = simulate_ar1(ProcessSpec{0.0, 1.0, 2.0}, 1'000'000, 12);
  CHECK(std::abs(sample_autocorrelation(z, 1)[0]) < 0.005);
}

TEST_CASE("AR(1) autocorrelation decays like phi^k") {
  const std::size_t n = 1'000'000;
  const double phi = 0.75;
  const auto z = simulate_ar1(ProcessSpec{}, n, 13);
  const auto acf = sample_autocorrelation(z, 10);
  for (std::size_t k = 1; k <= 10; ++k) {
    // Bartlett variance of the lag-k sample autocorrelation of an AR(1)
    const double p2k = std::pow(phi, 2.0 * k);
    const double var = ((1 + phi * phi) * (1 - p2k) / (1 - phi * phi) - 2.0 * k * p2k) / n;
    CHECK(std::abs(acf[k - 1] - std::pow(phi, k)) <= 3.0 * std::sqrt(var));
  }
}

TEST_CASE("AR(1) is reproducible from its seed") {
  const auto a = simulate_ar1(ProcessSpec{}, 5000, 99);
  const auto b = simulate_ar1(ProcessSpec{}, 5000, 99);
  const auto c = simulate_ar1(ProcessSpec{}, 5000, 100);
  CHECK(a == b);
  CHECK(a != c);
  CHECK_THROWS_AS(simulate_ar1(ProcessSpec{}, 0, 1), InvalidArgument);
}

TEST_CASE("truncated normal") {
  const auto g = trunc_normal(2.0);
  const double p = std::erf(2.0 / std::sqrt(2.0));
  CHECK_THAT(g.mass(), WithinAbs(p, 1e-14));
  CHECK_THAT(g.quantile(0.5), WithinAbs(0.0, 1e-12));
  CHECK_THAT(g.pdf(0.0), WithinAbs(0.4179, 1e-4));
  CHECK_THAT(g.pdf(0.0), WithinAbs(1.0 / std::sqrt(2.0 * M_PI) / p, 1e-14));
  CHECK(g.cdf(2.0) == 1.0);
  CHECK(g.cdf(-2.0) == 0.0);
  CHECK(g.pdf(2.5) == 0.0);
  CHECK_THROWS_AS(g.quantile(1.1), InvalidArgument);
  CHECK_THROWS_AS(g.quantile(-0.1), InvalidArgument);
  CHECK_THROWS_AS(trunc_normal(0.0), InvalidArgument);
  for (double u : {1e-9, 0.01, 0.2, 0.5, 0.77, 0.999}) {
    CHECK_THAT(g.cdf(g.quantile(u)), WithinAbs(u, 1e-12));
  }
  CHECK_THAT(integrate([&](double x) { return g.pdf(x); }, -2.0, 2.0), WithinAbs(1.0, 1e-10));
}

TEST_CASE("transform_to_x") {
  const ProcessSpec spec{};
  CHECK(transform_to_x({0.0}, spec) == std::vector<double>{0.0});

  std::vector<double> z = linspace(-6.0, 6.0, 400);
  const auto x = transform_to_x(z, spec);
  CHECK(std::is_sorted(x.begin(), x.end()));
  for (double v : x) CHECK(std::abs(v) <= spec.c);

  const auto g = trunc_normal(spec.c);
  const auto sample = iid_design(spec, 100'000, 21);
  CHECK(ks_statistic(sample, [&](double v) { return g.cdf(v); }) < 0.01);
}

TEST_CASE("transformed design passes a chi-square goodness-of-fit test") {
  const ProcessSpec spec{};
  const auto g = trunc_normal(spec.c);
  const auto sample = iid_design(spec, 100'000, 22);
  const int bins = 40;
  std::vector<double> counts(bins, 0.0);
  for (double v : sample) {
    const int b = std::min(bins - 1, static_cast<int>(g.cdf(v) * bins));
    counts[b] += 1.0;
  }
  const double expected = static_cast<double>(sample.size()) / bins;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const boost::math::chi_squared dist(bins - 1);
  CHECK(boost::math::cdf(boost::math::complement(dist, chi2)) > 0.001);
}

TEST_CASE("generate_sample") {
  const ProcessSpec spec{};
  const auto s0 = generate_sample(spec, benchmark_regression, 0.0, 500, 5);
  for (std::size_t i = 0; i < s0.size(); ++i) {
    CHECK(s0.y[i] == benchmark_regression(s0.x[i]));
    CHECK(std::abs(s0.x[i]) <= spec.c);
  }
  CHECK(benchmark_regression(0.0) == 2.0);

  // the design does not depend on the noise level
  const auto s1 = generate_sample(spec, benchmark_regression, 1.0, 500, 5);
  CHECK(s0.x == s1.x);
  CHECK(generate_sample(spec, benchmark_regression, 1.0, 500, 5).y == s1.y);

  CHECK_THROWS_AS(generate_sample(spec, benchmark_regression, -0.1, 10, 1), InvalidArgument);
  CHECK_THROWS_AS(generate_sample(spec, benchmark_regression, 0.1, 0, 1), InvalidArgument);
}

TEST_CASE("noise is centred") {
  const double sigma = 0.5;
  const auto s = generate_sample(ProcessSpec{}, benchmark_regression, sigma, 1'000'000, 6);
  CompensatedSum e;
  for (std::size_t i = 0; i < s.size(); ++i) e += s.y[i] - benchmark_regression(s.x[i]);
  CHECK(std::abs(e.value() / s.size()) < 3.0 * sigma / 1000.0);
}

TEST_CASE("named regression functions") {
  CHECK(regression_from_string("benchmark")(0.0) == 2.0);
  CHECK(regression_from_string("sin")(0.5) == std::sin(0.5));
  CHECK(regression_from_string("zero")(3.0) == 0.0);
  CHECK(regression_from_string("linear")(-2.0) == -2.0);
  CHECK_THROWS_AS(regression_from_string("cubic"), InvalidArgument);
}

TEST_CASE("sample autocorrelation") {
  CHECK_THROWS_AS(sample_autocorrelation(std::vector<double>(50, 3.0), 2), InvalidArgument);
  CHECK_THROWS_AS(sample_autocorrelation({1.0, 2.0}, 2), InvalidArgument);
  CHECK_THROWS_AS(sample_autocorrelation({1.0, 2.0, 3.0}, 0), InvalidArgument);

  NormalStream eta(31);
  std::vector<double> iid(100'000);
  for (auto& v : iid) v = eta();
  CHECK(std::abs(sample_autocorrelation(iid, 1)[0]) < 0.01);

  const auto x = generate_sample(ProcessSpec{}, benchmark_regression, 0.5, 100'000, 32).x;
  const auto acf = sample_autocorrelation(x, 20);
  CHECK(acf[0] > acf[4]);
  CHECK(acf[4] > acf[19]);
  CHECK(acf[19] > 0.0);

  // lag-1 biased estimator by hand
  const std::vector<double> v = {1, 3, 2, 5, 4};
  const double m = 3.0;
  double c0 = 0, c1 = 0;
  for (std::size_t i = 0; i < v.size(); ++i) c0 += (v[i] - m) * (v[i] - m);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) c1 += (v[i] - m) * (v[i + 1] - m);
  CHECK_THAT(sample_autocorrelation(v, 1)[0], WithinAbs(c1 / c0, 1e-15));
}

TEST_CASE("regression sample slicing") {
  RegressionSample s{{1, 2, 3, 4}, {5, 6, 7, 8}};
  const auto b = s.slice(1, 2);
  CHECK(b.x == std::vector<double>{2, 3});
  CHECK(b.y == std::vector<double>{6, 7});
  CHECK_THROWS_AS(s.slice(3, 2), InvalidArgument);
  CHECK_THROWS_AS((RegressionSample{{1}, {}}.validate()), InvalidArgument);
}
