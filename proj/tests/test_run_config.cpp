#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <string>

#include "glkern/run_config.hpp"

using namespace glkern;

TEST_CASE("configuration round-trips through its text form") {
  RunConfig cfg;
  cfg.command = "study";
  cfg.seed = 18446744073709551557ULL;
  cfg.sigma = 0.1 + 0.2;
  cfg.x = {-0.5, 1.0 / 3.0};
  cfg.ns = {500, 8000};
  cfg.delta = "theory";
  cfg.adaptive = true;
  cfg.gamma_lo = 5e-8;
  const auto back = run_config_from_text(to_text(cfg));
  CHECK(nlohmann::json(back) == nlohmann::json(cfg));
  CHECK(to_text(back) == to_text(cfg));
  CHECK(back.sigma == cfg.sigma);
  CHECK(back.seed == cfg.seed);
  CHECK(back.x[1] == 1.0 / 3.0);
}

TEST_CASE("partial documents keep defaults and base values") {
  RunConfig base;
  base.seed = 99;
  const auto cfg = run_config_from_text(R"({"sigma": 1.0, "ns": [2000]})", base);
  CHECK(cfg.sigma == 1.0);
  CHECK(cfg.ns == std::vector<std::size_t>{2000});
  CHECK(cfg.seed == 99);
  CHECK(cfg.q == 100);
  CHECK(cfg.sigmas == std::vector<double>{0.1, 0.5, 1.0});
}

TEST_CASE("bad documents are rejected") {
  CHECK_THROWS_AS(run_config_from_text(R"({"sigmaa": 1.0})"), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_text(R"({"sigma": "high"})"), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_text("[1, 2]"), InvalidArgument);
  CHECK_THROWS_AS(run_config_from_text("{not json"), InvalidArgument);
}

TEST_CASE("derived settings") {
  RunConfig cfg;
  cfg.phi = 0.5;
  cfg.c = 3.0;
  cfg.seed = 7;
  cfg.kernel = "epanechnikov";
  const auto p = cfg.process();
  CHECK(p.phi == 0.5);
  CHECK(p.c == 3.0);
  CHECK(cfg.delta_exponent() == DeltaExponent::Simulation);
  cfg.delta = "theory";
  CHECK(cfg.gl_options().delta == DeltaExponent::Theory);
  cfg.delta = "sideways";
  CHECK_THROWS_AS(cfg.delta_exponent(), InvalidArgument);
  cfg.delta = "simulation";
  const auto sc = cfg.study(2000, 1.0);
  CHECK(sc.n == 2000);
  CHECK(sc.sigma == 1.0);
  CHECK(sc.base_seed == 7);
  CHECK(sc.kernel.family == KernelFamily::Epanechnikov);
  CHECK(sc.process.phi == 0.5);
  CHECK(sc.replicas == 50);
  CHECK(sc.gamma_count == 21);
}

TEST_CASE("seed from the environment") {
  ::unsetenv("GLKERN_SEED");
  CHECK(seed_from_env(5) == 5);
  ::setenv("GLKERN_SEED", "", 1);
  CHECK(seed_from_env(5) == 5);
  ::setenv("GLKERN_SEED", "123", 1);
  CHECK(seed_from_env(5) == 123);
  ::setenv("GLKERN_SEED", "12x", 1);
  CHECK_THROWS_AS(seed_from_env(5), InvalidArgument);
  ::unsetenv("GLKERN_SEED");
}
