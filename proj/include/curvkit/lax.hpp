#pragma once

#include <string>
#include <utility>
#include <vector>

#include "curvkit/atoms.hpp"
#include "curvkit/connection.hpp"

namespace curvkit {

/// The three worked zero-curvature pairs. Direction conventions:
///   nls:  p=0, q=2, x = continuous 0, t = continuous 1; data = u(x,t)
///   sg:   p=1, q=1, n = lattice 0, t = continuous 0; data = theta (real)
///   toda: p=2, q=0, m = lattice 0, n = lattice 1; data = u > 0
enum class LaxKind { Nls, SineGordon, Toda };

inline const char* to_string(LaxKind k) {
  switch (k) {
    case LaxKind::Nls: return "nls";
    case LaxKind::SineGordon: return "sg";
    default: return "toda";
  }
}

struct LaxExample {
  LaxKind kind = LaxKind::Nls;
  Field data;
  double gamma = 1.0;       // sg coupling
  double wavenumber = 1.0;  // sg spectral parameter k
  double lambda = 1.0;      // toda spectral parameter
  bool as_printed = false;  // nls: keep the transposed derivative entries
};

inline LaxExample make_nls(const Field& u, bool as_printed = false) {
  if (!u.is_scalar()) throw ConfigError("nls field must be scalar");
  if (u.domain().p() != 0 || u.domain().q() != 2)
    throw ConfigError("nls lives on p=0, q=2 (x, t)");
  LaxExample ex;
  ex.kind = LaxKind::Nls;
  ex.data = u;
  ex.as_printed = as_printed;
  return ex;
}

inline LaxExample make_sg(const Field& theta, double gamma, double wavenumber) {
  if (!theta.is_scalar()) throw ConfigError("sg field must be scalar");
  if (theta.domain().p() != 1 || theta.domain().q() != 1)
    throw ConfigError("sg lives on p=1, q=1 (n, t)");
  if (!std::isfinite(gamma) || !std::isfinite(wavenumber))
    throw ConfigError("sg parameters must be finite");
  if (wavenumber == 0.0) throw ConfigError("sg wavenumber k must be nonzero");
  if (theta.max_imag_abs() > 1e-12)
    throw ConfigError("sg angle field must be real-valued");
  LaxExample ex;
  ex.kind = LaxKind::SineGordon;
  ex.data = theta;
  ex.gamma = gamma;
  ex.wavenumber = wavenumber;
  return ex;
}

inline LaxExample make_toda(const Field& u, double lambda) {
  if (!u.is_scalar()) throw ConfigError("toda field must be scalar");
  if (u.domain().p() != 2 || u.domain().q() != 0)
    throw ConfigError("toda lives on p=2, q=0 (m, n)");
  if (!std::isfinite(lambda) || lambda == 0.0)
    throw ConfigError("toda spectral parameter must be finite and nonzero");
  if (u.max_imag_abs() > 1e-12)
    throw ConfigError("toda field must be real-valued");
  if (!(u.min_real() > 0.0))
    throw ConfigError("toda field must be strictly positive");
  LaxExample ex;
  ex.kind = LaxKind::Toda;
  ex.data = u;
  ex.lambda = lambda;
  return ex;
}

/// Convenience: toda data given as q with u = e^q.
inline LaxExample make_toda_from_q(const Field& q, double lambda) {
  return make_toda(cexp(q), lambda);
}

/// Connection coefficients for each example. The nls time matrix as
/// printed carries i du/dx and i du*/dx in the (1,2)/(2,1) slots; the
/// corrected variant (default) swaps them, which is what actually zeroes
/// the curvature on solutions.
inline Connection build_connection(const LaxExample& ex, int order = 2) {
  const Domain& dom = ex.data.domain();
  Connection conn;
  conn.dom = dom;
  conn.m = 2;
  const Complex I(0.0, 1.0);
  switch (ex.kind) {
    case LaxKind::Nls: {
      const Field& u = ex.data;
      Field uc = u.conjugate();
      Field z = Field::zero(dom, 1, 1);
      conn.B_C.push_back(Field::matrix_of({{z, uc}, {u.scaled(-1.0), z}}));
      Field mag = (u * uc).scaled(-I);  // -i|u|^2
      Field ux = u.partial(0, order);
      Field ucx = uc.partial(0, order);
      Field b12 = (ex.as_printed ? ux : ucx).scaled(I);
      Field b21 = (ex.as_printed ? ucx : ux).scaled(I);
      conn.B_C.push_back(Field::matrix_of({{mag, b12}, {b21, mag.scaled(-1.0)}}));
      break;
    }
    case LaxKind::SineGordon: {
      const Field& th = ex.data;
      const Complex g_ik = ex.gamma / (I * ex.wavenumber);
      Field off_p = cexp(th, I).scaled(g_ik);
      Field off_m = cexp(th, -I).scaled(g_ik);
      Field mone = Field::constant_scalar(dom, -1.0);
      conn.B_C.push_back(Field::matrix_of({{mone, off_p}, {off_m, mone}}));
      Field dth = th.delta(0);
      Field d11 = mone + cexp(dth, -0.5 * I);
      Field d22 = mone + cexp(dth, 0.5 * I);
      Field ik = Field::constant_scalar(dom, I * ex.wavenumber);
      conn.B_D.push_back(Field::matrix_of({{d11, ik}, {ik, d22}}));
      break;
    }
    case LaxKind::Toda: {
      const Field& u = ex.data;
      Field un = u.translate(1, -1);  // u_{m,n-1}
      Field um = u.translate(0, -1);  // u_{m-1,n}
      Field lam1 = Field::constant_scalar(dom, ex.lambda - 1.0);
      Field l_un = un.inverse().scaled(ex.lambda);
      Field l_um = um.inverse().scaled(ex.lambda);
      conn.B_D.push_back(Field::matrix_of(
          {{lam1, l_un}, {u, Field::constant_scalar(dom, -2.0)}}));
      conn.B_D.push_back(Field::matrix_of({{lam1 + u * um.inverse(), l_um},
                                           {u, Field::constant_scalar(dom, -1.0)}}));
      break;
    }
  }
  conn.validate();
  return conn;
}

/// Compatibility residual in the operand order each example is usually
/// written in; up to overall sign this is the corresponding curvature
/// component, so flat means integrable. Keyed like curvature_components
/// output so the same norm reporting applies.
inline CurvatureComponents zero_curvature_residual(const LaxExample& ex,
                                                   int order = 2) {
  Connection conn = build_connection(ex, order);
  CurvatureComponents out;
  out.dom = conn.dom;
  out.m = conn.m;
  switch (ex.kind) {
    case LaxKind::Nls: {
      const Field& bx = conn.B_C[0];
      const Field& bt = conn.B_C[1];
      out.cc.emplace(std::make_pair(0, 1),
                     bx.partial(1, order) - bt.partial(0, order) + bt * bx - bx * bt);
      break;
    }
    case LaxKind::SineGordon: {
      const Field& bc = conn.B_C[0];
      const Field& bd = conn.B_D[0];
      out.dc.emplace(std::make_pair(0, 0),
                     bc.delta(0) - bd.partial(0, order) + bd * bc.shift(0) - bc * bd);
      break;
    }
    case LaxKind::Toda: {
      const Field& b1 = conn.B_D[0];
      const Field& b2 = conn.B_D[1];
      out.dd.emplace(std::make_pair(0, 1),
                     b1.delta(1) - b2.delta(0) + b2 * b1.shift(1) - b1 * b2.shift(0));
      break;
    }
  }
  return out;
}

/// Residual of the reduced integrable equation each flat connection is
/// equivalent to:
///   nls:  u_t + i u_xx + 2i |u|^2 u
///   sg:   d/dt (theta_{n+1} - theta_n) - c gamma sin((theta_{n+1} + theta_n)/2)
///   toda: q_{m+1,n} - 2 q_{m,n} + q_{m-1,n}
///         - ln[(e^{q_{m,n+1} - q_{m,n}} + 1) / (e^{q_{m,n} - q_{m,n-1}} + 1)]
/// The sg coefficient c defaults to 4, the value the zero-curvature
/// condition actually forces; passing the printed c=1 (or any other c)
/// measures how far that variant is from equivalence.
inline Field reduced_equation_residual(const LaxExample& ex, int order = 2,
                                       double sg_coefficient = 4.0) {
  const Complex I(0.0, 1.0);
  switch (ex.kind) {
    case LaxKind::Nls: {
      const Field& u = ex.data;
      Field uxx = u.partial(0, order).partial(0, order);
      return u.partial(1, order) + uxx.scaled(I) +
             (u * u.conjugate() * u).scaled(2.0 * I);
    }
    case LaxKind::SineGordon: {
      const Field& th = ex.data;
      Field lhs = th.delta(0).partial(0, order);
      Field rhs = csin((th.shift(0) + th).scaled(0.5)).scaled(sg_coefficient * ex.gamma);
      return lhs - rhs;
    }
    default: {
      Field q = ex.data.map([](Complex z) { return std::log(z); });
      Field lhs = q.translate(0, -1) + q.translate(0, 1) - q.scaled(2.0);
      auto log1pexp = [](Complex z) {
        if (z.real() > 500.0)
          throw NumericalError("toda exponent overflow in reduced equation");
        return std::log(std::exp(z) + 1.0);
      };
      Field up = (q.translate(1, 1) - q).map(log1pexp);
      Field dn = (q - q.translate(1, -1)).map(log1pexp);
      return lhs - (up - dn);
    }
  }
}

/// One row per candidate solution: the flatness residual next to the
/// reduced-equation residual, so agreement (or disagreement) of the two
/// certificates is visible side by side.
struct WitnessRow {
  std::string label;
  double curvature_max = 0.0;
  double reduced_max = 0.0;
};

inline std::vector<WitnessRow> equivalence_witness(
    const std::vector<std::pair<std::string, LaxExample>>& candidates, int order = 2,
    double sg_coefficient = 4.0) {
  std::vector<WitnessRow> rows;
  rows.reserve(candidates.size());
  for (const auto& [label, ex] : candidates) {
    WitnessRow row;
    row.label = label;
    row.curvature_max = residual_norms(zero_curvature_residual(ex, order)).worst_max();
    row.reduced_max = reduced_equation_residual(ex, order, sg_coefficient).max_norm();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace curvkit
