#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "curvkit/forms.hpp"

namespace curvkit {

/// Connection coefficients in the row-vector convention: sections are
/// 1 x m rows, the connection acts by right multiplication, and every
/// coefficient matrix is m x m. B_D holds one matrix field per discrete
/// direction, B_C one per continuous direction.
struct Connection {
  Domain dom;
  int m = 1;
  std::vector<Field> B_D;
  std::vector<Field> B_C;

  void validate() const {
    if (m < 1) throw ConfigError("fiber dimension must be positive");
    if (B_D.size() != static_cast<size_t>(dom.p()) ||
        B_C.size() != static_cast<size_t>(dom.q()))
      throw ConfigError("connection needs one coefficient per direction");
    auto check = [&](const Field& f, const std::string& what) {
      if (!(f.domain() == dom))
        throw ConfigError(what + " lives on a different domain");
      if (f.rows() != m || f.cols() != m)
        throw ConfigError(what + " is not " + std::to_string(m) + "x" + std::to_string(m));
    };
    for (size_t mu = 0; mu < B_D.size(); ++mu)
      check(B_D[mu], "B_D[" + std::to_string(mu) + "]");
    for (size_t i = 0; i < B_C.size(); ++i)
      check(B_C[i], "B_C[" + std::to_string(i) + "]");
  }
};

/// The connection packaged as a matrix-coefficient 1-form.
inline Form connection_form(const Connection& conn) {
  conn.validate();
  Form b(conn.dom, 1, conn.m, conn.m);
  for (int mu = 0; mu < conn.dom.p(); ++mu)
    b.add_term(BasisWedge{{mu}, {}}, conn.B_D[static_cast<size_t>(mu)]);
  for (int i = 0; i < conn.dom.q(); ++i)
    b.add_term(BasisWedge{{}, {i}}, conn.B_C[static_cast<size_t>(i)]);
  return b;
}

/// Covariant derivative of a row-coefficient n-form:
///   D(Omega) = d Omega + (-1)^(n+1) Omega ^ B.
/// For a section (0-form) this is the familiar
///   D s = sum_mu (Delta_mu s - s B_D_mu) dn^mu
///       + sum_i (partial_i s - s B_C_i) dx^i.
inline Form covariant_derivative(const Form& omega, const Connection& conn,
                                 int order = 2) {
  conn.validate();
  if (!(omega.domain() == conn.dom))
    throw ConfigError("form and connection live on different domains");
  if (omega.cols() != conn.m)
    throw ConfigError("coefficient width does not match the fiber dimension");
  Form b = connection_form(conn);
  const double sign = omega.degree() % 2 == 0 ? -1.0 : 1.0;
  return omega.d(order) + omega.wedge(b).scaled(sign);
}

inline Form covariant_derivative(const Field& section, const Connection& conn,
                                 int order = 2) {
  return covariant_derivative(Form::from_field(section), conn, order);
}

/// Constant basis row e_alpha (1 x m).
inline Field basis_row(const Domain& dom, int m, int alpha) {
  if (alpha < 0 || alpha >= m) throw ConfigError("basis index outside fiber");
  CMatrix e = CMatrix::Zero(1, m);
  e(0, alpha) = 1.0;
  return Field::constant(dom, e);
}

/// Deformed bimodule compatibility of D: for a scalar f and basis section
/// s_alpha, compares D(s_alpha f) with D(s_alpha) f + sigma(s_alpha (x) df),
/// where the right action pushes f past dn^mu as E_mu f and sigma adds the
/// braiding correction (Delta_mu f) e_alpha B_D_mu on discrete covectors.
/// Returns the max-norm of the difference; exact up to roundoff.
inline double sigma_check(int alpha, const Field& f, const Connection& conn,
                          int order = 2) {
  conn.validate();
  if (!f.is_scalar()) throw ConfigError("sigma_check needs a scalar field");
  if (!(f.domain() == conn.dom))
    throw ConfigError("field and connection live on different domains");
  const Field e = basis_row(conn.dom, conn.m, alpha);
  Form lhs = covariant_derivative(f * e, conn, order);

  Form rhs(conn.dom, 1, 1, conn.m);
  for (int mu = 0; mu < conn.dom.p(); ++mu) {
    const Field& bd = conn.B_D[static_cast<size_t>(mu)];
    const Field row = (e * bd).scaled(-1.0);      // coefficient of D s_alpha
    Field coeff = row * f.shift(mu)               // right action applies E_mu
                  + f.delta(mu) * e               // df (x) s_alpha
                  + f.delta(mu) * (e * bd);       // braiding correction
    rhs.add_term(BasisWedge{{mu}, {}}, coeff);
  }
  for (int i = 0; i < conn.dom.q(); ++i) {
    const Field& bc = conn.B_C[static_cast<size_t>(i)];
    Field coeff = (e * bc).scaled(-1.0) * f + f.partial(i, order) * e;
    rhs.add_term(BasisWedge{{}, {i}}, coeff);
  }
  return max_abs_diff(lhs, rhs);
}

/// Curvature components keyed by direction pairs: dd for (mu < nu),
/// cc for (i < j), dc for mixed (mu, i). Each value is an m x m field.
struct CurvatureComponents {
  Domain dom;
  int m = 1;
  std::map<std::pair<int, int>, Field> dd;
  std::map<std::pair<int, int>, Field> cc;
  std::map<std::pair<int, int>, Field> dc;

  /// Intersection of all component regions.
  Region common_region() const {
    Region reg = Region::full(dom);
    for (const auto* group : {&dd, &cc, &dc})
      for (const auto& [k, f] : *group) reg = reg.intersect(f.region());
    return reg;
  }
};

/// Direct evaluation of the curvature component formulas:
///   F_dd(mu,nu) = Delta_mu B_nu - Delta_nu B_mu + B_mu E_mu B_nu - B_nu E_nu B_mu
///   F_cc(i,j)   = partial_i B_j - partial_j B_i + B_i B_j - B_j B_i
///   F_dc(mu,i)  = Delta_mu B_i - partial_i B_mu + B_mu E_mu B_i - B_i B_mu
inline CurvatureComponents curvature_components(const Connection& conn, int order = 2) {
  conn.validate();
  CurvatureComponents out;
  out.dom = conn.dom;
  out.m = conn.m;
  const int p = conn.dom.p(), q = conn.dom.q();
  for (int mu = 0; mu < p; ++mu)
    for (int nu = mu + 1; nu < p; ++nu) {
      const Field& a = conn.B_D[static_cast<size_t>(mu)];
      const Field& b = conn.B_D[static_cast<size_t>(nu)];
      out.dd.emplace(std::make_pair(mu, nu),
                     b.delta(mu) - a.delta(nu) + a * b.shift(mu) - b * a.shift(nu));
    }
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j) {
      const Field& a = conn.B_C[static_cast<size_t>(i)];
      const Field& b = conn.B_C[static_cast<size_t>(j)];
      out.cc.emplace(std::make_pair(i, j),
                     b.partial(i, order) - a.partial(j, order) + a * b - b * a);
    }
  for (int mu = 0; mu < p; ++mu)
    for (int i = 0; i < q; ++i) {
      const Field& a = conn.B_D[static_cast<size_t>(mu)];
      const Field& b = conn.B_C[static_cast<size_t>(i)];
      out.dc.emplace(std::make_pair(mu, i),
                     b.delta(mu) - a.partial(i, order) + a * b.shift(mu) - b * a);
    }
  return out;
}

/// Independent curvature route: apply the covariant derivative twice to
/// probe sections and read the components off the resulting 2-form via
/// D(D s) = -s F. Probes default to the constant basis rows (stack S = I);
/// custom probes must stack to a pointwise invertible matrix, solved as
/// F = -S^{-1} Phi.
inline CurvatureComponents curvature_via_D2(const Connection& conn, int order = 2,
                                            const std::vector<Field>* probes = nullptr) {
  conn.validate();
  std::vector<Field> rows;
  if (probes) {
    if (static_cast<int>(probes->size()) != conn.m)
      throw ConfigError("need exactly m probe sections");
    rows = *probes;
    for (const Field& s : rows)
      if (s.rows() != 1 || s.cols() != conn.m)
        throw ConfigError("probe sections must be 1 x m rows");
  } else {
    for (int k = 0; k < conn.m; ++k) rows.push_back(basis_row(conn.dom, conn.m, k));
  }
  std::vector<Form> phi;
  phi.reserve(rows.size());
  for (const Field& s : rows)
    phi.push_back(covariant_derivative(covariant_derivative(s, conn, order), conn, order));

  Field S = Field::stack_rows(rows);
  const bool canonical = !probes;
  auto extract = [&](const BasisWedge& w) -> Field {
    std::vector<Field> stacked;
    stacked.reserve(phi.size());
    for (const Form& ph : phi) stacked.push_back(ph.coefficient(w));
    Field stack = Field::stack_rows(stacked);
    if (canonical) return stack.scaled(-1.0);
    return (S.inverse() * stack).scaled(-1.0);
  };

  CurvatureComponents out;
  out.dom = conn.dom;
  out.m = conn.m;
  const int p = conn.dom.p(), q = conn.dom.q();
  for (int mu = 0; mu < p; ++mu)
    for (int nu = mu + 1; nu < p; ++nu)
      out.dd.emplace(std::make_pair(mu, nu), extract(BasisWedge{{mu, nu}, {}}));
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j)
      out.cc.emplace(std::make_pair(i, j), extract(BasisWedge{{}, {i, j}}));
  for (int mu = 0; mu < p; ++mu)
    for (int i = 0; i < q; ++i)
      out.dc.emplace(std::make_pair(mu, i), extract(BasisWedge{{mu}, {i}}));
  return out;
}

struct ComponentNorms {
  double max = 0.0;
  double l2 = 0.0;
};

/// Max and l2 norms per component, all taken over the common region so the
/// numbers are comparable, plus that region and its point count.
struct NormReport {
  std::map<std::string, ComponentNorms> components;
  Region region;
  long points = 0;

  double worst_max() const {
    double v = 0.0;
    for (const auto& [k, n] : components) v = std::max(v, n.max);
    return v;
  }
};

inline NormReport residual_norms(const CurvatureComponents& comps) {
  NormReport rep;
  rep.region = comps.common_region();
  if (rep.region.empty())
    throw ConfigError("curvature components have no common region");
  rep.points = rep.region.points();
  auto note = [&](const char* tag, const std::pair<int, int>& key, const Field& f) {
    Field r = f.restricted(rep.region);
    ComponentNorms n;
    n.max = r.max_norm();
    n.l2 = r.l2_norm();
    rep.components.emplace(std::string(tag) + "(" + std::to_string(key.first) + "," +
                               std::to_string(key.second) + ")",
                           n);
  };
  for (const auto& [k, f] : comps.dd) note("dd", k, f);
  for (const auto& [k, f] : comps.cc) note("cc", k, f);
  for (const auto& [k, f] : comps.dc) note("dc", k, f);
  return rep;
}

/// Worst max-norm discrepancy between two curvature computations over
/// matching components.
inline double max_component_diff(const CurvatureComponents& a,
                                 const CurvatureComponents& b) {
  auto diff = [](const std::map<std::pair<int, int>, Field>& x,
                 const std::map<std::pair<int, int>, Field>& y) {
    if (x.size() != y.size()) throw ConfigError("component sets differ");
    double v = 0.0;
    for (const auto& [k, f] : x) {
      auto it = y.find(k);
      if (it == y.end()) throw ConfigError("component sets differ");
      v = std::max(v, max_abs_diff(f, it->second));
    }
    return v;
  };
  return std::max({diff(a.dd, b.dd), diff(a.cc, b.cc), diff(a.dc, b.dc)});
}

}  // namespace curvkit
