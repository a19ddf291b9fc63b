#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "curvkit/rng.hpp"
#include "curvkit/sim.hpp"

using namespace curvkit;

TEST_CASE("nls run grid covers one period and the requested time window") {
  NlsConfig cfg;
  cfg.x_lo = 0.0;
  cfg.x_hi = 8.0;
  cfg.h = 0.5;
  cfg.dt = 0.01;
  cfg.steps = 10;
  Domain dom = nls_grid_domain(cfg);
  REQUIRE(dom.sample_count(0) == 16);  // wrap image of x_lo is not stored
  REQUIRE(dom.sample_x(0, 15) == Catch::Approx(7.5));
  REQUIRE(dom.sample_count(1) == 11);
  REQUIRE(dom.sample_x(1, 10) == Catch::Approx(0.1));

  cfg.h = 0.07;
  REQUIRE_THROWS_AS(nls_grid_domain(cfg), ConfigError);
  cfg.h = 0.5;
  cfg.steps = 0;
  REQUIRE_THROWS_AS(nls_grid_domain(cfg), ConfigError);
  cfg.steps = 10;
  cfg.x_hi = 0.4;
  cfg.h = 0.1;
  REQUIRE_THROWS_AS(nls_grid_domain(cfg), ConfigError);  // < 8 samples
  REQUIRE_THROWS_AS(nls_solve(nullptr, NlsConfig{}), ConfigError);
}

TEST_CASE("nls zero data is a fixed point") {
  NlsConfig cfg;
  cfg.x_lo = 0.0;
  cfg.x_hi = 8.0;
  cfg.h = 0.25;
  cfg.dt = 0.01;
  cfg.steps = 20;
  NlsRun run = nls_solve([](double) { return Complex(0.0); }, cfg);
  REQUIRE(run.u.max_norm() == 0.0);
  REQUIRE(run.mass_initial == 0.0);
  REQUIRE(run.mass_drift == 0.0);
}

TEST_CASE("nls splitting tracks the soliton") {
  NlsConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 200;
  NlsRun run = nls_solve([](double x) { return nls_soliton(x, 0.0); }, cfg);
  const Domain& dom = run.u.domain();
  double err = 0.0;
  for (long j = 0; j < dom.sample_count(0); ++j) {
    const Complex got = run.u.at({}, {j, cfg.steps})(0, 0);
    err = std::max(err, std::abs(got - nls_soliton(dom.sample_x(0, j), 0.2)));
  }
  REQUIRE(err <= 1e-5);
  REQUIRE(run.mass_drift <= 1e-10);
}

TEST_CASE("nls time error halves quadratically") {
  auto err_at = [](double dt) {
    NlsConfig cfg;
    cfg.x_lo = -20.0;
    cfg.x_hi = 20.0;
    cfg.h = 0.1;
    cfg.dt = dt;
    cfg.steps = static_cast<long>(std::llround(0.2 / dt));
    NlsRun run = nls_solve([](double x) { return nls_soliton(x, 0.0); }, cfg);
    const Domain& dom = run.u.domain();
    double err = 0.0;
    for (long j = 0; j < dom.sample_count(0); ++j) {
      const Complex got = run.u.at({}, {j, cfg.steps})(0, 0);
      err = std::max(err, std::abs(got - nls_soliton(dom.sample_x(0, j), 0.2)));
    }
    return err;
  };
  const double ratio = err_at(4e-3) / err_at(2e-3);
  REQUIRE(ratio >= 3.5);
  REQUIRE(ratio <= 4.5);
}

TEST_CASE("both linear substeps are unitary") {
  const long n = 64;
  std::vector<Complex> u(static_cast<size_t>(n));
  Rng rng(31);
  for (Complex& z : u) z = rng.complex_box(1.0);
  auto l2 = [&] {
    double s = 0.0;
    for (const Complex& z : u) s += std::norm(z);
    return std::sqrt(s);
  };
  const double before = l2();

  detail_sim::NlsSpectral spectral(n, 8.0, 1e-3);
  spectral.linear_step(u);
  REQUIRE(std::abs(l2() - before) <= 1e-13 * before);

  detail_sim::NlsCrankNicolson cn(n, 0.125, 1e-3);
  cn.linear_step(u);
  REQUIRE(std::abs(l2() - before) <= 1e-12 * before);
}

TEST_CASE("crank-nicolson conserves mass on generic data") {
  NlsConfig cfg;
  cfg.x_lo = 0.0;
  cfg.x_hi = 8.0;
  cfg.h = 0.125;
  cfg.dt = 1e-3;
  cfg.steps = 200;
  cfg.method = NlsMethod::CrankNicolson;
  NlsRun run = nls_solve(
      [](double x) { return Complex(0.5 * std::sin(2.0 * M_PI * x / 8.0), 0.2); }, cfg);
  REQUIRE(run.mass_initial > 0.1);
  REQUIRE(run.mass_drift <= 1e-10);
}

TEST_CASE("sg chain fixed points") {
  SgConfig cfg;
  cfg.sites = 8;
  cfg.dt = 1e-2;
  cfg.steps = 50;
  auto none = [](double) { return 0.0; };

  Field zero = sg_integrate(std::vector<double>(8, 0.0), none, cfg);
  REQUIRE(zero.max_norm() == 0.0);

  Field pi_chain = sg_integrate(std::vector<double>(8, M_PI), none, cfg);
  REQUIRE(max_abs_diff(pi_chain, Field::constant_scalar(pi_chain.domain(), M_PI)) <=
          1e-10);
}

TEST_CASE("sg integrator converges at fourth order") {
  const long sites = 12;
  std::vector<double> theta0(static_cast<size_t>(sites));
  Rng rng(32);
  for (double& v : theta0) v = rng.uniform(-1.2, 1.2);
  auto drive = [](double t) { return 0.3 * std::cos(t); };

  auto final_state = [&](double dt) {
    SgConfig cfg;
    cfg.sites = sites;
    cfg.dt = dt;
    cfg.steps = static_cast<long>(std::llround(0.5 / dt));
    Field th = sg_integrate(theta0, drive, cfg);
    std::vector<double> out(static_cast<size_t>(sites));
    for (long j = 0; j < sites; ++j)
      out[static_cast<size_t>(j)] = th.at({j}, {cfg.steps})(0, 0).real();
    return out;
  };
  std::vector<double> ref = final_state(0.025 / 8.0);
  auto err = [&](double dt) {
    std::vector<double> got = final_state(dt);
    double e = 0.0;
    for (size_t j = 0; j < got.size(); ++j) e = std::max(e, std::abs(got[j] - ref[j]));
    return e;
  };
  const double ratio = err(0.025) / err(0.0125);
  REQUIRE(ratio >= 12.0);
  REQUIRE(ratio <= 20.0);
}

TEST_CASE("sg integrator validates its inputs") {
  auto none = [](double) { return 0.0; };
  SgConfig cfg;
  cfg.steps = 0;
  REQUIRE_THROWS_AS(sg_integrate(std::vector<double>(4, 0.0), none, cfg), ConfigError);
  cfg.steps = 10;
  REQUIRE_THROWS_AS(sg_integrate(std::vector<double>(1, 0.0), none, cfg), ConfigError);
  REQUIRE_THROWS_AS(sg_integrate(std::vector<double>(4, 0.0), nullptr, cfg), ConfigError);
}

TEST_CASE("toda recursion fixed points and idempotence") {
  TodaConfig cfg{10, 8};
  std::vector<double> zeros(8, 0.0), twos(8, 2.0);
  REQUIRE(toda_evolve(zeros, zeros, cfg).max_norm() == 0.0);
  REQUIRE(max_abs_diff(toda_evolve(twos, twos, cfg),
                       Field::constant_scalar(
                           make_domain({{0, 9}, {0, 7}}, {}), 2.0)) == 0.0);

  std::vector<double> q0(8), q1(8);
  Rng rng(33);
  for (size_t j = 0; j < 8; ++j) {
    q0[j] = rng.uniform(-0.5, 0.5);
    q1[j] = q0[j] + rng.uniform(-0.1, 0.1);
  }
  Field full = toda_evolve(q0, q1, cfg);
  std::vector<double> r1(8), r2(8);
  for (long j = 0; j < 8; ++j) {
    r1[static_cast<size_t>(j)] = full.at({1, j}, {})(0, 0).real();
    r2[static_cast<size_t>(j)] = full.at({2, j}, {})(0, 0).real();
  }
  Field rerun = toda_evolve(r1, r2, TodaConfig{9, 8});
  double diff = 0.0;
  for (long mm = 0; mm < 9; ++mm)
    for (long j = 0; j < 8; ++j)
      diff = std::max(diff, std::abs(rerun.at({mm, j}, {})(0, 0) -
                                     full.at({mm + 1, j}, {})(0, 0)));
  REQUIRE(diff <= 1e-13);
}

TEST_CASE("toda recursion guards against exponent overflow") {
  std::vector<double> q0(8, 0.0), q1(8);
  for (size_t j = 0; j < 8; ++j) q1[j] = j % 2 == 0 ? 400.0 : -400.0;
  REQUIRE_THROWS_AS(toda_evolve(q0, q1, TodaConfig{4, 8}), NumericalError);
  REQUIRE_THROWS_AS(toda_evolve(q0, q1, TodaConfig{4, 2}), ConfigError);
  REQUIRE_THROWS_AS(toda_evolve(q0, std::vector<double>(5, 0.0), TodaConfig{4, 8}),
                    ConfigError);
}

TEST_CASE("order fit recovers exact power laws") {
  std::vector<std::pair<double, double>> pts = {{0.1, 7.0 * 1e-3}, {0.05, 7.0 * 1.25e-4}};
  REQUIRE(fit_order(pts) == Catch::Approx(3.0).epsilon(1e-12));
  REQUIRE_THROWS_AS(fit_order({{0.1, 1e-3}}), ConfigError);
  REQUIRE_THROWS_AS(fit_order({{0.1, 0.0}, {0.05, 1e-4}}), ConfigError);
}
