#include <catch2/catch_amalgamated.hpp>

#include "curvkit/atoms.hpp"
#include "curvkit/forms.hpp"
#include "curvkit/random_fields.hpp"

using namespace curvkit;

namespace {

Form one_form_dn(const Field& f, int mu) {
  Form a(f.domain(), 1, f.rows(), f.cols());
  a.add_term(BasisWedge{{mu}, {}}, f);
  return a;
}

Form one_form_dx(const Field& f, int i) {
  Form a(f.domain(), 1, f.rows(), f.cols());
  a.add_term(BasisWedge{{}, {i}}, f);
  return a;
}

}  // namespace

TEST_CASE("wedge shifts left-dn factors past right coefficients") {
  Domain dom = make_domain({{0, 5}, {0, 5}}, {});
  Field n0 = Field::lattice_coordinate(dom, 0);
  // (n0 dn^0) ^ (n0 dn^1): coefficient n0 * E_0 n0 = n(n+1), value 6 at n=2
  Form prod = one_form_dn(n0, 0).wedge(one_form_dn(n0, 1));
  Field coeff = prod.coefficient(BasisWedge{{0, 1}, {}});
  REQUIRE(std::abs(coeff.at({2, 0}, {})(0, 0) - Complex(6.0)) < 1e-15);

  REQUIRE(one_form_dn(n0, 0).wedge(one_form_dn(n0, 0)).empty());
}

TEST_CASE("wedge antisymmetry on continuous covectors is exact") {
  Domain dom = make_domain({}, {{0.0, 1.0, 0.25}, {0.0, 1.0, 0.25}});
  Rng rng(3);
  Field f = random_trig_scalar(dom, rng);
  Field g = random_trig_scalar(dom, rng);
  Form ab = one_form_dx(f, 0).wedge(one_form_dx(g, 1));
  Form ba = one_form_dx(g, 1).wedge(one_form_dx(f, 0));
  REQUIRE((ab + ba).max_norm() <= 1e-15);
  REQUIRE(one_form_dx(f, 0).wedge(one_form_dx(g, 0)).empty());
}

TEST_CASE("differential of a mixed product splits as x dn + n dx") {
  Domain dom = make_domain({{0, 7}}, {{0.0, 2.0, 0.125}});
  Field n = Field::lattice_coordinate(dom, 0);
  Field x = Field::coordinate(dom, 0);
  Form d_nx = Form::from_field(n * x).d();

  REQUIRE(max_abs_diff(d_nx.coefficient(BasisWedge{{0}, {}}), x) <= 1e-12);
  REQUIRE(max_abs_diff(d_nx.coefficient(BasisWedge{{}, {0}}), n) <= 1e-12);
  REQUIRE(d_nx.d().max_norm() <= 1e-12);
}

TEST_CASE("coordinate functions pair with their covectors") {
  Domain dom = make_domain({{0, 4}, {0, 4}}, {{0.0, 1.0, 0.25}});
  Field one = Field::constant_scalar(dom, 1.0);
  for (int mu = 0; mu < 2; ++mu) {
    Form d_n = Form::from_field(Field::lattice_coordinate(dom, mu)).d_discrete();
    REQUIRE(max_abs_diff(d_n.coefficient(BasisWedge{{mu}, {}}), one) == 0.0);
    REQUIRE(d_n.coefficient(BasisWedge{{1 - mu}, {}}).max_norm() == 0.0);
  }
  Form d_x = Form::from_field(Field::coordinate(dom, 0)).d_continuous();
  REQUIRE(max_abs_diff(d_x.coefficient(BasisWedge{{}, {0}}), one) <= 1e-14);

  // basis covectors themselves are closed
  REQUIRE(one_form_dn(one, 0).d().empty());
  REQUIRE(one_form_dx(one, 0).d().empty());
}

TEST_CASE("wedge of generic 1-forms matches the componentwise oracle") {
  Domain dom = make_domain({{0, 4}, {0, 4}}, {{0.0, 1.0, 0.25}, {0.0, 1.0, 0.25}});
  for (int c = 0; c < 10; ++c) {
    Rng rng(500 + static_cast<std::uint64_t>(c));
    Field a0 = random_trig_scalar(dom, rng), a1 = random_trig_scalar(dom, rng);
    Field ax = random_trig_scalar(dom, rng), ay = random_trig_scalar(dom, rng);
    Field b0 = random_trig_scalar(dom, rng), b1 = random_trig_scalar(dom, rng);
    Field bx = random_trig_scalar(dom, rng), by = random_trig_scalar(dom, rng);
    Form a = one_form_dn(a0, 0) + one_form_dn(a1, 1) + one_form_dx(ax, 0) +
             one_form_dx(ay, 1);
    Form b = one_form_dn(b0, 0) + one_form_dn(b1, 1) + one_form_dx(bx, 0) +
             one_form_dx(by, 1);
    Form w = a.wedge(b);

    auto check = [&](const BasisWedge& bw, const Field& want) {
      REQUIRE(max_abs_diff(w.coefficient(bw), want) <= 1e-13);
    };
    check(BasisWedge{{0, 1}, {}}, a0 * b1.shift(0) - a1 * b0.shift(1));
    check(BasisWedge{{0}, {0}}, a0 * bx.shift(0) - ax * b0);
    check(BasisWedge{{0}, {1}}, a0 * by.shift(0) - ay * b0);
    check(BasisWedge{{1}, {0}}, a1 * bx.shift(1) - ax * b1);
    check(BasisWedge{{1}, {1}}, a1 * by.shift(1) - ay * b1);
    check(BasisWedge{{}, {0, 1}}, ax * by - ay * bx);
  }
}

TEST_CASE("anti-difference primitives of textbook forms") {
  Domain dom = make_domain({{0, 8}}, {});
  Field n = Field::lattice_coordinate(dom, 0);
  Field one = Field::constant_scalar(dom, 1.0);

  Form p1 = discrete_primitive(one_form_dn(one, 0));
  REQUIRE(max_abs_diff(p1.coefficient(BasisWedge{}), n) <= 1e-14);

  Form p2 = discrete_primitive(one_form_dn(n.scaled(2.0) + one, 0));
  REQUIRE(max_abs_diff(p2.coefficient(BasisWedge{}), n * n) <= 1e-13);
}

TEST_CASE("primitives reproduce random exact lattice forms") {
  for (int c = 0; c < 50; ++c) {
    Rng rng(900 + static_cast<std::uint64_t>(c));
    const int p = static_cast<int>(rng.integer(2, 3));
    std::vector<LatticeExtent> lat;
    for (int mu = 0; mu < p; ++mu) lat.push_back({0, rng.integer(4, 8)});
    Domain dom = make_domain(lat, {});

    const int source_degree = c % 2;  // exact 1-forms and 2-forms alternate
    Form alpha = random_form(dom, rng, source_degree);
    Form omega = alpha.d_discrete();
    if (omega.empty()) continue;
    Form prim = discrete_primitive(omega);
    const double rel = max_abs_diff(prim.d_discrete(), omega) /
                       (1.0 + omega.max_norm());
    REQUIRE(rel <= 1e-12);
  }
}

TEST_CASE("primitive construction rejects unusable inputs") {
  Domain dom = make_domain({{0, 6}, {0, 6}}, {});
  Field n0 = Field::lattice_coordinate(dom, 0);
  Field n1 = Field::lattice_coordinate(dom, 1);

  // d(n0*n1 dn^0) has a dn^0^dn^1 component, so closedness fails
  Form open = one_form_dn(n0 * n1, 0);
  REQUIRE_THROWS_MATCHES(discrete_primitive(open), NumericalError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("defect")));

  REQUIRE_THROWS_AS(discrete_primitive(Form::from_field(n0)), ConfigError);

  Domain mixed = make_domain({{0, 6}}, {{0.0, 1.0, 0.25}});
  Field one = Field::constant_scalar(mixed, 1.0);
  Form dx_only(mixed, 1, 1, 1);
  dx_only.add_term(BasisWedge{{}, {0}}, one);
  REQUIRE_THROWS_AS(discrete_primitive(dx_only), ConfigError);

  Domain cont_only = make_domain({}, {{0.0, 1.0, 0.25}});
  Form no_lattice(cont_only, 1, 1, 1);
  no_lattice.add_term(BasisWedge{{}, {0}},
                      Field::constant_scalar(cont_only, 1.0));
  REQUIRE_THROWS_AS(discrete_primitive(no_lattice), ConfigError);
}

TEST_CASE("discrete differential squares to zero on grid backends") {
  Domain dom = make_domain({{0, 6}, {0, 6}}, {});
  Rng rng(77);
  Field f = random_trig_scalar(dom, rng).sampled();
  REQUIRE(Form::from_field(f).d_discrete().d_discrete().max_norm() <= 1e-12);

  Form a = random_form(dom, rng, 1);
  REQUIRE(a.d_discrete().d_discrete().max_norm() <= 1e-12);
}
