#pragma once

#include <cmath>
#include <map>
#include <string>

#include "curvkit/random_fields.hpp"
#include "curvkit/report.hpp"

namespace curvkit {

/// Randomized identity suites over seeded inputs. Every identity here is
/// exact in the calculus, so each case should land at roundoff; worst is
/// the largest max-norm over cases, l2 aggregates across cases.

struct IdentityOptions {
  std::uint64_t seed = 20250801;
  int cases = 100;
  double tol = 1e-12;
};

struct SuiteResult {
  double worst = 0.0;
  double sumsq = 0.0;
  long cases = 0;

  void note(double r) {
    worst = std::max(worst, r);
    sumsq += r * r;
    ++cases;
  }
  double l2() const { return std::sqrt(sumsq); }
};

namespace detail_ident {

inline Domain domain_with(Rng& rng, int pmin, int pmax, int qmin, int qmax,
                          long extent_hi = 6, long samples_hi = 9) {
  const int p = static_cast<int>(rng.integer(pmin, pmax));
  int q = static_cast<int>(rng.integer(qmin, qmax));
  if (p == 0 && q == 0) q = 1;
  std::vector<LatticeExtent> lat;
  for (int mu = 0; mu < p; ++mu) lat.push_back({0, rng.integer(3, extent_hi)});
  std::vector<ContinuousRange> cont;
  for (int i = 0; i < q; ++i) {
    const long samples = rng.integer(5, samples_hi);
    cont.push_back({0.0, 1.0, 1.0 / static_cast<double>(samples - 1)});
  }
  return make_domain(lat, cont);
}

/// Polynomial of continuous degree <= 1 per direction; order-2 stencils
/// are exact on the quadratic products these form.
inline Field low_degree_poly(const Domain& dom, Rng& rng) {
  Field acc = Field::constant_scalar(dom, rng.complex_box(1.0));
  for (int mu = 0; mu < dom.p(); ++mu)
    acc = acc + Field::lattice_coordinate(dom, mu).scaled(rng.complex_box(0.5));
  for (int i = 0; i < dom.q(); ++i)
    acc = acc + Field::coordinate(dom, i).scaled(rng.complex_box(1.0));
  return acc;
}

}  // namespace detail_ident

inline std::map<std::string, SuiteResult> run_identity_suites(const IdentityOptions& opt) {
  std::map<std::string, SuiteResult> out;
  const int cases = opt.cases;

  // deformed Leibniz: Delta_mu(fg) = (Delta_mu f)(E_mu g) + f (Delta_mu g)
  {
    SuiteResult& res = out["deformed_leibniz"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 1 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 1, 2, 0, 2, 5, 7);
      Field f = random_trig_scalar(dom, rng);
      Field g = random_trig_scalar(dom, rng);
      Field fg = f * g;
      for (int mu = 0; mu < dom.p(); ++mu)
        res.note((fg.delta(mu) - (f.delta(mu) * g.shift(mu) + f * g.delta(mu))).max_norm());
    }
  }

  // ordinary Leibniz through grid stencils, on data where they are exact
  {
    SuiteResult& res = out["ordinary_leibniz"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 2 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 0, 1, 1, 2);
      Field f = detail_ident::low_degree_poly(dom, rng).sampled();
      Field g = detail_ident::low_degree_poly(dom, rng).sampled();
      Field fg = f * g;
      for (int i = 0; i < dom.q(); ++i)
        res.note((fg.partial(i) - (f.partial(i) * g + f * g.partial(i))).max_norm());
    }
  }

  // shift/difference exactness on polynomial lattice fields, relative norm
  {
    SuiteResult& res = out["shift_delta"];
    for (int c = 0; c < 2 * cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 3 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 1, 2, 0, 1);
      Field f = random_poly_scalar(dom, rng, 3);
      if (c % 2 == 1) f = f.sampled();  // grid backend: shifts stay exact
      for (int mu = 0; mu < dom.p(); ++mu) {
        Field sh = f.shift(mu);
        res.note(((f.delta(mu) + f) - sh).max_norm() / (1.0 + sh.max_norm()));
      }
    }
  }

  // d(d omega) = 0 across degrees
  {
    SuiteResult& res = out["d_squared"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 4 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 0, 2, 0, 2, 3, 5);
      const int max_deg = std::min(2, dom.p() + dom.q());
      const int deg = static_cast<int>(rng.integer(0, max_deg));
      Form w = random_form(dom, rng, deg);
      res.note(w.d().d().max_norm());
    }
  }

  // d(a ^ b) = da ^ b + (-1)^|a| a ^ db
  {
    SuiteResult& res = out["graded_leibniz"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 5 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 0, 2, 0, 2, 3, 5);
      const int total = dom.p() + dom.q();
      const int da = static_cast<int>(rng.integer(0, std::min(1, total)));
      const int db = static_cast<int>(rng.integer(0, std::min(1, total - da)));
      const bool matrix = rng.uniform() < 0.5;
      const int m = matrix ? 2 : 1;
      Form a = random_form(dom, rng, da, m, m, 0.8);
      Form b = random_form(dom, rng, db, m, m, 0.8);
      Form lhs = a.wedge(b).d();
      Form rhs = a.d().wedge(b) + a.wedge(b.d()).scaled(da % 2 == 0 ? 1.0 : -1.0);
      res.note(max_abs_diff(lhs, rhs));
    }
  }

  // (a ^ b) ^ c = a ^ (b ^ c)
  {
    SuiteResult& res = out["wedge_assoc"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 6 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 1, 2, 0, 2, 3, 5);
      const int total = dom.p() + dom.q();
      const int da = static_cast<int>(rng.integer(0, 1));
      const int db = static_cast<int>(rng.integer(0, std::min(1, total - da)));
      const int dc = static_cast<int>(rng.integer(0, std::max(0, std::min(1, total - da - db))));
      Form a = random_form(dom, rng, da, 1, 1, 0.8);
      Form b = random_form(dom, rng, db, 1, 1, 0.8);
      Form cc = random_form(dom, rng, dc, 1, 1, 0.8);
      res.note(max_abs_diff(a.wedge(b).wedge(cc), a.wedge(b.wedge(cc))));
    }
  }

  // dn^mu f = (E_mu f) dn^mu and [dx^i, f] = 0
  {
    SuiteResult& res = out["cotangent_commutation"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 7 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 0, 2, 0, 2, 5, 7);
      Field f = random_trig_scalar(dom, rng);
      Form f0 = Form::from_field(f);
      Field one = Field::constant_scalar(dom, 1.0);
      for (int mu = 0; mu < dom.p(); ++mu) {
        Form dn(dom, 1, 1, 1);
        dn.add_term(BasisWedge{{mu}, {}}, one);
        res.note(max_abs_diff(dn.wedge(f0).coefficient(BasisWedge{{mu}, {}}), f.shift(mu)));
      }
      for (int i = 0; i < dom.q(); ++i) {
        Form dx(dom, 1, 1, 1);
        dx.add_term(BasisWedge{{}, {i}}, one);
        Form lhs = dx.wedge(f0);
        Form rhs = f0.wedge(dx);
        res.note(max_abs_diff(lhs, rhs));
        res.note(max_abs_diff(lhs.coefficient(BasisWedge{{}, {i}}), f));
      }
    }
  }

  // difference and derivative commute on grids
  {
    SuiteResult& res = out["delta_partial_commute"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 8 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 1, 2, 1, 2, 5, 7);
      Field f = random_trig_scalar(dom, rng).sampled();
      for (int mu = 0; mu < dom.p(); ++mu)
        for (int i = 0; i < dom.q(); ++i)
          res.note((f.delta(mu).partial(i) - f.partial(i).delta(mu)).max_norm());
    }
  }

  // deformed bimodule rule for the covariant derivative
  {
    SuiteResult& res = out["sigma_bimodule"];
    for (int c = 0; c < cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 9 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 0, 2, 0, 2, 3, 5);
      const int m = static_cast<int>(rng.integer(1, 3));
      Connection conn = random_connection(dom, rng, m);
      Field f = random_trig_scalar(dom, rng);
      const int alpha = static_cast<int>(rng.integer(0, m - 1));
      res.note(sigma_check(alpha, f, conn));
    }
  }

  // component formulas against the double covariant derivative
  {
    SuiteResult& res = out["path_equivalence"];
    const int path_cases = std::max(1, cases / 2);
    for (int c = 0; c < path_cases; ++c) {
      Rng rng(opt.seed + 1000003UL * 10 + static_cast<std::uint64_t>(c));
      Domain dom = detail_ident::domain_with(rng, 0, 2, 0, 2, 3, 5);
      const int m = static_cast<int>(rng.integer(1, 3));
      Connection conn = random_connection(dom, rng, m);
      res.note(max_component_diff(curvature_components(conn), curvature_via_D2(conn)));
    }
  }

  return out;
}

inline Report identities_report(const IdentityOptions& opt) {
  Report rep;
  rep.example = "identities";
  rep.params["seed"] = opt.seed;
  rep.params["cases"] = opt.cases;
  auto suites = run_identity_suites(opt);
  bool pass = true;
  long total_cases = 0;
  for (const auto& [name, res] : suites) {
    rep.add_residual(name, res.worst, res.l2());
    rep.grid[name + "_cases"] = res.cases;
    total_cases += res.cases;
    pass = pass && res.worst <= opt.tol;
  }
  rep.grid["total_cases"] = total_cases;
  rep.tolerances["identity_max"] = opt.tol;
  rep.pass = pass;
  return rep;
}

}  // namespace curvkit
