#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "glkern/kernels.hpp"

using namespace glkern;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const KernelSpec kGauss{KernelFamily::Gaussian};
const KernelSpec kEpan{KernelFamily::Epanechnikov};
const KernelSpec kUnif{KernelFamily::Uniform};

// Midpoint rule on a fine grid; independent of the adaptive quadrature.
template <class F>
double riemann(const F& f, double a, double b, int cells = 400000) {
  const double w = (b - a) / cells;
  double s = 0.0;
  for (int i = 0; i < cells; ++i) s += f(a + (i + 0.5) * w);
  return s * w;
}

}  // namespace

TEST_CASE("eval_scaled examples") {
  CHECK_THAT(eval_scaled(kGauss, 1.0, 0.0), WithinAbs(0.3989422804, 1e-10));
  CHECK(eval_scaled(kUnif, 0.5, 0.6) == 0.0);
  CHECK_THAT(eval_scaled(kGauss, 2.0, 2.0), WithinAbs(0.1209853623, 1e-10));
  CHECK_THROWS_AS(eval_scaled(kGauss, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(eval_scaled(kGauss, -1.0, 1.0), InvalidArgument);
}

TEST_CASE("eval_convolved examples") {
  CHECK_THAT(eval_convolved(kGauss, 1.0, 1.0, 0.0), WithinAbs(0.2820947918, 1e-10));
  CHECK_THAT(eval_convolved(kGauss, 3.0, 4.0, 0.0), WithinAbs(0.0797884561, 1e-10));
  CHECK_THAT(eval_convolved(kUnif, 1.0, 1.0, 0.0), WithinAbs(0.5, 1e-10));
  CHECK_THROWS_AS(eval_convolved(kUnif, 0.0, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(eval_convolved(kUnif, 1.0, -2.0, 0.0), InvalidArgument);
}

TEST_CASE("uniform convolution is the trapezoid overlap") {
  // (K_h * K_h2)(u) = |[-h,h] n [u-h2,u+h2]| / (4 h h2)
  for (auto [h, h2] : {std::pair{1.0, 1.0}, std::pair{0.3, 0.7}, std::pair{0.5, 0.2}}) {
    for (double u : {-1.2, -0.6, -0.1, 0.0, 0.25, 0.55, 0.9, 1.5}) {
      const double lo = std::max(-h, u - h2);
      const double hi = std::min(h, u + h2);
      const double oracle = std::max(0.0, hi - lo) / (4.0 * h * h2);
      CHECK_THAT(eval_convolved(kUnif, h, h2, u), WithinAbs(oracle, 1e-9));
    }
  }
}

TEST_CASE("epanechnikov convolution matches brute-force integration") {
  for (double u : {0.0, 0.3, -0.45, 0.8}) {
    const double h = 0.4, h2 = 0.25;
    const double oracle = riemann(
        [&](double t) {
          const double a = t / h, b = (u - t) / h2;
          const double ka = std::abs(a) <= 1 ? 0.75 * (1 - a * a) / h : 0.0;
          const double kb = std::abs(b) <= 1 ? 0.75 * (1 - b * b) / h2 : 0.0;
          return ka * kb;
        },
        -1.0, 1.0);
    CHECK_THAT(eval_convolved(kEpan, h, h2, u), WithinAbs(oracle, 1e-7));
  }
}

TEST_CASE("kernel norms") {
  const auto g = kernel_norms(kGauss);
  CHECK_THAT(g.l1, WithinAbs(1.0, 1e-12));
  CHECK_THAT(g.l2, WithinAbs(0.5311259661, 1e-10));
  CHECK_THAT(g.sup, WithinAbs(0.3989422804, 1e-10));
  const auto u = kernel_norms(kUnif);
  CHECK_THAT(u.l1, WithinAbs(1.0, 1e-12));
  CHECK_THAT(u.l2, WithinAbs(0.7071067812, 1e-10));
  CHECK_THAT(u.sup, WithinAbs(0.5, 1e-12));
  const auto e = kernel_norms(kEpan);
  CHECK_THAT(e.l1, WithinAbs(1.0, 1e-12));
  CHECK_THAT(e.l2, WithinAbs(0.7745966692, 1e-10));
  CHECK_THAT(e.sup, WithinAbs(0.75, 1e-12));

  for (const auto& k : {kGauss, kEpan, kUnif}) {
    const double r = k.reach();
    const auto n = kernel_norms(k);
    CHECK_THAT(riemann([&](double v) { return std::abs(k(v)); }, -r, r), WithinAbs(n.l1, 1e-6));
    CHECK_THAT(std::sqrt(riemann([&](double v) { return k(v) * k(v); }, -r, r)),
               WithinAbs(n.l2, 1e-6));
  }
}

TEST_CASE("kernel order") {
  CHECK(kernel_order(kGauss, 1));
  CHECK_FALSE(kernel_order(kGauss, 2));
  CHECK(kernel_order(kEpan, 1));
  CHECK(kernel_order(kUnif, 1));
  CHECK(kernel_order(kGauss, 0));
  CHECK_THROWS_AS(kernel_order(kGauss, -1), InvalidArgument);
  CHECK_THAT(kernel_moment(kGauss, 2), WithinAbs(1.0, 1e-10));
  CHECK_THAT(kernel_abs_moment(kGauss, 2.0), WithinAbs(1.0, 1e-10));
  CHECK_THAT(kernel_abs_moment(kGauss, 1.0), WithinAbs(std::sqrt(2.0 / std::numbers::pi), 1e-10));
}

TEST_CASE("kernel invariants") {
  for (const auto& k : {kGauss, kEpan, kUnif}) {
    const double r = k.reach();
    CHECK_THAT(integrate([&](double u) { return k(u); }, -r, r), WithinAbs(1.0, 1e-8));
    CHECK_THAT(integrate([&](double u) { return u * k(u); }, -r, r), WithinAbs(0.0, 1e-8));
    if (k.compact()) {
      for (double u : {1.0000001, 1.5, -1.0000001, -7.0}) CHECK(k(u) == 0.0);
    }
    for (double h : {0.05, 0.3, 1.0, 2.5}) {
      CHECK_THAT(integrate([&](double u) { return eval_scaled(k, h, u); }, -r * h, r * h),
                 WithinAbs(1.0, 1e-8));
    }
    for (auto [h, h2] : {std::pair{0.2, 0.5}, std::pair{1.0, 0.1}, std::pair{0.7, 0.7}}) {
      for (double u : linspace(-1.5, 1.5, 31)) {
        CHECK_THAT(eval_convolved(k, h, h2, u), WithinAbs(eval_convolved(k, h2, h, u), 1e-10));
      }
      const double span = r * (h + h2);
      const double mass =
          integrate([&](double u) { return eval_convolved(k, h, h2, u); }, -span, span, 1e-9, 64);
      CHECK_THAT(mass, WithinAbs(1.0, 1e-6));
    }
  }
}

TEST_CASE("kernel names round trip") {
  for (const auto& k : {kGauss, kEpan, kUnif}) {
    CHECK(kernel_from_string(to_string(k.family)) == k);
  }
  CHECK_THROWS_AS(kernel_from_string("triweight"), InvalidArgument);
}
