#pragma once

#include <cmath>

#include "curvkit/field.hpp"

namespace curvkit {

/// Scalar elementary functions of scalar fields. On grids they reduce to
/// pointwise maps (differentiated later by stencils, if at all); on
/// analytic fields each carries its exact chain rule, and the families are
/// closed under differentiation so derivatives of any order stay exact.

namespace detail_atoms {

inline void need_scalar(const Field& f, const char* what) {
  if (!f.is_scalar())
    throw ConfigError(std::string(what) + " needs a scalar field");
}

inline Field lift(const Field& f, const std::function<Complex(Complex)>& fn,
                  const std::function<Field(const Field&)>& dfn) {
  if (f.is_grid() || !f.differentiable()) return f.map(fn);
  Field self = f;
  return Field::analytic(
      f.domain(), 1, 1,
      [self, fn](const Point& pt) {
        CMatrix m(1, 1);
        m(0, 0) = fn(self.value_at(pt)(0, 0));
        return m;
      },
      [self, dfn](int i) { return dfn(self) * self.partial(i); });
}

}  // namespace detail_atoms

/// exp(c * f)
inline Field cexp(const Field& f, Complex c = Complex(1.0)) {
  detail_atoms::need_scalar(f, "cexp");
  return detail_atoms::lift(
      f, [c](Complex z) { return std::exp(c * z); },
      [c](const Field& g) { return cexp(g, c).scaled(c); });
}

inline Field csin(const Field& f);
inline Field ccos(const Field& f);

inline Field csin(const Field& f) {
  detail_atoms::need_scalar(f, "csin");
  return detail_atoms::lift(
      f, [](Complex z) { return std::sin(z); },
      [](const Field& g) { return ccos(g); });
}

inline Field ccos(const Field& f) {
  detail_atoms::need_scalar(f, "ccos");
  return detail_atoms::lift(
      f, [](Complex z) { return std::cos(z); },
      [](const Field& g) { return csin(g).scaled(-1.0); });
}

inline Field ctanh(const Field& f);
inline Field csech(const Field& f);

inline Field ctanh(const Field& f) {
  detail_atoms::need_scalar(f, "ctanh");
  return detail_atoms::lift(
      f, [](Complex z) { return std::tanh(z); },
      [](const Field& g) {
        Field s = csech(g);
        return s * s;
      });
}

inline Field csech(const Field& f) {
  detail_atoms::need_scalar(f, "csech");
  return detail_atoms::lift(
      f, [](Complex z) { return 1.0 / std::cosh(z); },
      [](const Field& g) { return (csech(g) * ctanh(g)).scaled(-1.0); });
}

/// sum_i omega_i x_i + sum_mu kappa_mu n_mu + phase, as a scalar field.
inline Field linear_phase(const Domain& dom, const std::vector<double>& kappa,
                          const std::vector<double>& omega, Complex phase = 0.0) {
  if (static_cast<int>(kappa.size()) != dom.p() ||
      static_cast<int>(omega.size()) != dom.q())
    throw ConfigError("linear_phase coefficient count does not match domain");
  Field acc = Field::constant_scalar(dom, phase);
  for (int mu = 0; mu < dom.p(); ++mu)
    if (kappa[static_cast<size_t>(mu)] != 0.0)
      acc = acc + Field::lattice_coordinate(dom, mu).scaled(kappa[static_cast<size_t>(mu)]);
  for (int i = 0; i < dom.q(); ++i)
    if (omega[static_cast<size_t>(i)] != 0.0)
      acc = acc + Field::coordinate(dom, i).scaled(omega[static_cast<size_t>(i)]);
  return acc;
}

}  // namespace curvkit
