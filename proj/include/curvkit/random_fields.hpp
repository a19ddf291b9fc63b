#pragma once

#include <vector>

#include "curvkit/atoms.hpp"
#include "curvkit/connection.hpp"
#include "curvkit/rng.hpp"

namespace curvkit {

/// Generators for the randomized identity suites. Everything produced here
/// is analytic with exact differentiation rules, bounded on the sample box,
/// and reproducible from the seed alone.

inline Domain random_domain(Rng& rng, int pmax = 2, int qmax = 2) {
  int p = static_cast<int>(rng.integer(0, pmax));
  int q = static_cast<int>(rng.integer(0, qmax));
  if (p == 0 && q == 0) (rng.uniform() < 0.5 && pmax > 0) ? p = 1 : q = 1;
  if (p == 0 && q == 0) p = 1;
  std::vector<LatticeExtent> lat;
  for (int mu = 0; mu < p; ++mu) lat.push_back({0, rng.integer(3, 6)});
  std::vector<ContinuousRange> cont;
  for (int i = 0; i < q; ++i) {
    const long samples = rng.integer(5, 9);
    cont.push_back({0.0, 1.0, 1.0 / static_cast<double>(samples - 1)});
  }
  return make_domain(lat, cont);
}

/// Sum of a constant and a few complex-amplitude sin/cos waves with small
/// lattice and continuous frequencies.
inline Field random_trig_scalar(const Domain& dom, Rng& rng, double amp = 1.0,
                                int terms = 2) {
  Field acc = Field::constant_scalar(dom, rng.complex_box(amp * 0.5));
  for (int t = 0; t < terms; ++t) {
    std::vector<double> kappa(static_cast<size_t>(dom.p()));
    std::vector<double> omega(static_cast<size_t>(dom.q()));
    for (auto& k : kappa) k = rng.uniform(-1.5, 1.5);
    for (auto& w : omega) w = rng.uniform(-2.0, 2.0);
    Field phase = linear_phase(dom, kappa, omega, Complex(rng.uniform(-3.0, 3.0)));
    Field wave = rng.uniform() < 0.5 ? csin(phase) : ccos(phase);
    acc = acc + wave.scaled(rng.complex_box(amp));
  }
  return acc;
}

/// Sparse polynomial in the lattice and continuous coordinates.
inline Field random_poly_scalar(const Domain& dom, Rng& rng, int max_degree = 2,
                                double amp = 1.0) {
  Field acc = Field::constant_scalar(dom, rng.complex_box(amp));
  const int monomials = static_cast<int>(rng.integer(1, 3));
  for (int t = 0; t < monomials; ++t) {
    Field mono = Field::constant_scalar(dom, rng.complex_box(amp));
    for (int mu = 0; mu < dom.p(); ++mu) {
      const long e = rng.integer(0, max_degree);
      for (long k = 0; k < e; ++k) mono = mono * Field::lattice_coordinate(dom, mu);
    }
    for (int i = 0; i < dom.q(); ++i) {
      const long e = rng.integer(0, max_degree);
      for (long k = 0; k < e; ++k) mono = mono * Field::coordinate(dom, i);
    }
    acc = acc + mono;
  }
  return acc;
}

inline Field random_matrix_field(const Domain& dom, Rng& rng, int rows, int cols,
                                 double amp = 1.0) {
  std::vector<std::vector<Field>> entries(static_cast<size_t>(rows));
  for (auto& row : entries)
    for (int c = 0; c < cols; ++c) row.push_back(random_trig_scalar(dom, rng, amp, 1));
  return Field::matrix_of(entries);
}

inline Connection random_connection(const Domain& dom, Rng& rng, int m,
                                    double amp = 0.4) {
  Connection conn;
  conn.dom = dom;
  conn.m = m;
  for (int mu = 0; mu < dom.p(); ++mu)
    conn.B_D.push_back(random_matrix_field(dom, rng, m, m, amp));
  for (int i = 0; i < dom.q(); ++i)
    conn.B_C.push_back(random_matrix_field(dom, rng, m, m, amp));
  return conn;
}

/// Degree-d form with random trig coefficients on every basis wedge drawn.
inline Form random_form(const Domain& dom, Rng& rng, int degree, int rows = 1,
                        int cols = 1, double amp = 1.0) {
  Form w(dom, degree, rows, cols);
  // enumerate all wedges of the requested degree and keep each with
  // probability 2/3 (at least one kept)
  std::vector<BasisWedge> all;
  const int total = dom.p() + dom.q();
  std::vector<int> pick(static_cast<size_t>(degree));
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == degree) {
      BasisWedge bw;
      for (int id : pick)
        if (id < dom.p())
          bw.dn.push_back(id);
        else
          bw.dx.push_back(id - dom.p());
      all.push_back(bw);
      return;
    }
    for (int id = start; id < total; ++id) {
      pick[static_cast<size_t>(depth)] = id;
      rec(id + 1, depth + 1);
    }
  };
  rec(0, 0);
  if (all.empty()) throw ConfigError("no wedge of that degree exists on this domain");
  bool kept = false;
  for (const auto& bw : all) {
    if (rng.uniform() < 2.0 / 3.0 || (!kept && &bw == &all.back())) {
      Field coeff = rows == 1 && cols == 1 ? random_trig_scalar(dom, rng, amp, 1)
                                           : random_matrix_field(dom, rng, rows, cols, amp);
      w.add_term(bw, coeff);
      kept = true;
    }
  }
  return w;
}

}  // namespace curvkit
