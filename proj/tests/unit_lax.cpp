#include <catch2/catch_amalgamated.hpp>

#include "curvkit/lax.hpp"
#include "curvkit/random_fields.hpp"
#include "curvkit/verify.hpp"

using namespace curvkit;

namespace {

constexpr Complex I(0.0, 1.0);

Domain nls_domain(double x_hi = 1.0, double t_hi = 1.0, double h = 0.1) {
  return make_domain({}, {{0.0, x_hi, h}, {0.0, t_hi, h}});
}

Field soliton(const Domain& dom) {
  Field x = Field::coordinate(dom, 0);
  Field t = Field::coordinate(dom, 1);
  Field sech = (cexp(x) + cexp(x, Complex(-1.0))).inverse().scaled(2.0);
  return sech * cexp(t, -I);
}

}  // namespace

TEST_CASE("connection matrices at reference points") {
  Domain td = make_domain({{0, 7}, {0, 7}}, {});
  Connection toda = build_connection(make_toda(Field::constant_scalar(td, 1.0), 1.0));
  CMatrix b1 = toda.B_D[0].at({2, 2}, {});
  CMatrix b2 = toda.B_D[1].at({2, 2}, {});
  CMatrix want1(2, 2), want2(2, 2);
  want1 << 0, 1, 1, -2;
  want2 << 1, 1, 1, -1;
  REQUIRE((b1 - want1).norm() <= 1e-14);
  REQUIRE((b2 - want2).norm() <= 1e-14);

  Domain sd = make_domain({{0, 7}}, {{0.0, 1.0, 0.25}});
  Connection sg = build_connection(make_sg(Field::constant_scalar(sd, 0.0), 1.0, 1.0));
  CMatrix bc = sg.B_C[0].at({3}, {1});
  CMatrix bd = sg.B_D[0].at({3}, {1});
  CMatrix wantc(2, 2), wantd(2, 2);
  wantc << -1.0, -I, -I, -1.0;
  wantd << 0.0, I, I, 0.0;
  REQUIRE((bc - wantc).norm() <= 1e-14);
  REQUIRE((bd - wantd).norm() <= 1e-14);

  Domain nd = nls_domain();
  Rng rng(21);
  Field u = random_trig_scalar(nd, rng, 0.7);
  Connection nls = build_connection(make_nls(u));
  REQUIRE(max_abs_diff(nls.B_C[0].entry(0, 1), u.conjugate()) <= 1e-14);
  REQUIRE(max_abs_diff(nls.B_C[0].entry(1, 0), u.scaled(-1.0)) <= 1e-14);
  REQUIRE(max_abs_diff(nls.B_C[1].entry(0, 0),
                       (u * u.conjugate()).scaled(-I)) <= 1e-14);
  REQUIRE(max_abs_diff(nls.B_C[1].entry(0, 1),
                       u.conjugate().partial(0).scaled(I)) <= 1e-14);
  REQUIRE(max_abs_diff(nls.B_C[1].entry(1, 0), u.partial(0).scaled(I)) <= 1e-14);
}

TEST_CASE("nls flatness certifies the soliton") {
  Domain dom = make_domain({}, {{-8.0, 8.0, 0.05}, {0.0, 1.0, 0.05}});
  LaxExample ex = make_nls(soliton(dom));
  REQUIRE(residual_norms(zero_curvature_residual(ex)).worst_max() <= 1e-9);
  REQUIRE(reduced_equation_residual(ex).max_norm() <= 1e-9);

  Field zero = Field::zero(dom, 1, 1);
  REQUIRE(residual_norms(zero_curvature_residual(make_nls(zero))).worst_max() == 0.0);
}

TEST_CASE("printed nls time matrix leaves a diagonal defect") {
  Domain dom = make_domain({}, {{-8.0, 8.0, 0.1}, {0.0, 1.0, 0.1}});
  LaxExample printed = make_nls(soliton(dom), true);
  Field res = zero_curvature_residual(printed).cc.at({0, 1});
  REQUIRE(res.entry(0, 0).max_norm() > 1e-2);
  REQUIRE(res.entry(1, 1).max_norm() > 1e-2);
}

TEST_CASE("nls residual structure holds off shell") {
  Domain dom = nls_domain();
  Rng rng(22);
  Field u = random_trig_scalar(dom, rng, 0.8);
  LaxExample ex = make_nls(u);
  Field res = zero_curvature_residual(ex).cc.at({0, 1});

  REQUIRE(res.entry(0, 0).max_norm() <= 1e-12);
  REQUIRE(res.entry(1, 1).max_norm() <= 1e-12);
  REQUIRE((res.entry(0, 1) + res.entry(1, 0).conjugate()).max_norm() <= 1e-12);
  REQUIRE(max_abs_diff(res.entry(1, 0).scaled(-1.0),
                       reduced_equation_residual(ex)) <= 1e-12);
}

TEST_CASE("sg residual is diagonal for any real angle field") {
  Domain dom = make_domain({{0, 11}}, {{0.0, 1.0, 0.05}});
  Rng rng(23);
  Field th = detail_verify::random_real_trig(dom, rng, 0.9);
  Field res = zero_curvature_residual(make_sg(th, 0.7, 1.3), 4).dc.at({0, 0});
  REQUIRE(res.entry(0, 1).max_norm() <= 1e-12);
  REQUIRE(res.entry(1, 0).max_norm() <= 1e-12);

  Field flat = zero_curvature_residual(make_sg(Field::constant_scalar(dom, 0.0), 1.0, 1.0))
                   .dc.at({0, 0});
  REQUIRE(flat.max_norm() <= 1e-14);
}

TEST_CASE("sg reduced equation carries coefficient 4") {
  Domain dom = make_domain({{0, 7}}, {{0.0, 1.0, 0.25}});
  const double half_pi = std::acos(0.0);
  LaxExample ex = make_sg(Field::constant_scalar(dom, half_pi), 0.9, 1.0);
  // constant angle: time derivative drops, residual is -c*gamma*sin(theta)
  REQUIRE(reduced_equation_residual(ex).max_norm() == Catch::Approx(3.6).margin(1e-12));
  REQUIRE(reduced_equation_residual(ex, 2, 1.0).max_norm() ==
          Catch::Approx(0.9).margin(1e-12));
}

TEST_CASE("toda residual sits in the corner entry and scales linearly in lambda") {
  Domain dom = make_domain({{0, 7}, {0, 7}}, {});
  Rng rng(24);
  Field u = detail_verify::random_real_trig(dom, rng, 0.4).scaled(0.5) +
            Field::constant_scalar(dom, 1.2);
  Field res1 = zero_curvature_residual(make_toda(u, 1.0)).dd.at({0, 1});
  Field res2 = zero_curvature_residual(make_toda(u, 2.0)).dd.at({0, 1});

  REQUIRE(res1.entry(0, 1).max_norm() <= 1e-12);
  REQUIRE(res1.entry(1, 0).max_norm() <= 1e-12);
  REQUIRE(res1.entry(1, 1).max_norm() <= 1e-12);
  REQUIRE(max_abs_diff(res2, res1.scaled(2.0)) <= 1e-12);

  Field ones = Field::constant_scalar(dom, 1.0);
  REQUIRE(residual_norms(zero_curvature_residual(make_toda(ones, 1.3))).worst_max() <=
          1e-14);
}

TEST_CASE("residual grows linearly from an exact solution") {
  Domain dom = make_domain({{0, 7}, {0, 7}}, {});
  Rng rng(25);
  Field g = detail_verify::random_real_trig(dom, rng, 1.0);
  auto residual_at = [&](double eps) {
    Field u = Field::constant_scalar(dom, 1.0) + g.scaled(eps);
    return residual_norms(zero_curvature_residual(make_toda(u, 1.0))).worst_max();
  };
  const double r3 = residual_at(1e-3), r2 = residual_at(1e-2);
  REQUIRE(r2 / r3 >= 7.0);
  REQUIRE(r2 / r3 <= 13.0);
}

TEST_CASE("equivalence witness pairs the two certificates") {
  Domain dom = make_domain({{0, 7}, {0, 7}}, {});
  Field exact = Field::constant_scalar(dom, 1.0);
  Field off = exact + csin(linear_phase(dom, {0.9, 0.4}, {}, Complex(0.3))).scaled(0.25);
  auto rows = equivalence_witness({{"exact", make_toda(exact, 1.0)},
                                   {"perturbed", make_toda(off, 1.0)}});
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].label == "exact");
  REQUIRE(rows[0].curvature_max <= 1e-13);
  REQUIRE(rows[0].reduced_max <= 1e-13);
  REQUIRE(rows[1].curvature_max > 1e-3);
  REQUIRE(rows[1].reduced_max > 1e-3);
}

TEST_CASE("example constructors validate their inputs") {
  Domain td = make_domain({{0, 3}, {0, 3}}, {});
  Field pos = Field::constant_scalar(td, 1.0);
  REQUIRE_THROWS_AS(make_toda(Field::constant_scalar(td, -1.0), 1.0), ConfigError);
  REQUIRE_THROWS_AS(make_toda(Field::constant_scalar(td, Complex(1.0, 0.5)), 1.0),
                    ConfigError);
  REQUIRE_THROWS_AS(make_toda(pos, 0.0), ConfigError);

  Domain sd = make_domain({{0, 3}}, {{0.0, 1.0, 0.25}});
  Field th = Field::constant_scalar(sd, 0.3);
  REQUIRE_THROWS_AS(make_sg(th, 1.0, 0.0), ConfigError);
  REQUIRE_THROWS_AS(make_sg(Field::constant_scalar(sd, Complex(0.0, 1.0)), 1.0, 1.0),
                    ConfigError);
  REQUIRE_THROWS_AS(make_sg(pos, 1.0, 1.0), ConfigError);  // wrong domain shape

  REQUIRE_THROWS_AS(make_nls(th, false), ConfigError);
  Domain nd = nls_domain();
  REQUIRE_THROWS_AS(make_nls(Field::zero(nd, 2, 2)), ConfigError);

  // toda convenience wrapper exponentiates, so any real q is accepted
  Field q = Field::constant_scalar(td, -3.0);
  REQUIRE(make_toda_from_q(q, 1.0).data.min_real() > 0.0);
}
