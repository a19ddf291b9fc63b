#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include <fftw3.h>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "curvkit/atoms.hpp"
#include "curvkit/field.hpp"

namespace curvkit {

// ---------------------------------------------------------------------------
// nls: u_t + i u_xx + 2i |u|^2 u = 0 on a periodic cell, Strang splitting.
// The nonlinear substep is an exact phase rotation (|u| is invariant), the
// linear substep is unitary in either method, so mass h*sum|u|^2 is
// conserved to roundoff while the overall splitting error is O(dt^2).
// ---------------------------------------------------------------------------

enum class NlsMethod { Spectral, CrankNicolson };

struct NlsConfig {
  double x_lo = -20.0;
  double x_hi = 20.0;  // periodic cell [x_lo, x_hi); h must divide the width
  double h = 0.05;
  double dt = 1e-3;
  long steps = 1000;
  NlsMethod method = NlsMethod::Spectral;
};

/// Standing soliton sech(x) e^{-it}, an exact solution.
inline Complex nls_soliton(double x, double t) {
  return (1.0 / std::cosh(x)) * std::exp(Complex(0.0, -t));
}

/// The soliton as an analytic field with exact derivatives of all orders.
inline Field nls_soliton_field(const Domain& dom) {
  if (dom.p() != 0 || dom.q() != 2) throw ConfigError("nls lives on p=0, q=2");
  Field envelope = csech(Field::coordinate(dom, 0));
  Field phase = cexp(Field::coordinate(dom, 1), Complex(0.0, -1.0));
  return envelope * phase;
}

/// Grid domain an nls run produces: x samples cover one period (the right
/// endpoint is the wrap image of x_lo and is not stored), t covers
/// [0, steps*dt].
inline Domain nls_grid_domain(const NlsConfig& cfg) {
  const double width = cfg.x_hi - cfg.x_lo;
  if (!(width > 0.0) || !(cfg.h > 0.0)) throw ConfigError("nls cell is empty");
  const double nreal = width / cfg.h;
  const long n = static_cast<long>(std::llround(nreal));
  if (n < 8 || std::abs(nreal - static_cast<double>(n)) > 1e-9 * nreal)
    throw ConfigError("nls spacing must divide the cell width into >= 8 samples");
  if (cfg.steps < 1 || !(cfg.dt > 0.0)) throw ConfigError("nls needs steps >= 1, dt > 0");
  return make_domain({}, {{cfg.x_lo, cfg.x_lo + static_cast<double>(n - 1) * cfg.h, cfg.h},
                          {0.0, static_cast<double>(cfg.steps) * cfg.dt, cfg.dt}});
}

struct NlsRun {
  Field u;                 // grid field over (x, t)
  double mass_initial = 0.0;
  double mass_drift = 0.0;  // max |mass(t_k) - mass(0)| over the run
};

namespace detail_sim {

inline void nls_nonlinear_half(std::vector<Complex>& u, double dt) {
  for (Complex& z : u) {
    const double a2 = z.real() * z.real() + z.imag() * z.imag();
    z *= std::exp(Complex(0.0, -2.0 * a2 * (dt / 2.0)));
  }
}

class NlsSpectral {
 public:
  NlsSpectral(long n, double width, double dt) : n_(n), phase_(static_cast<size_t>(n)) {
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * static_cast<size_t>(n)));
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
    const double two_pi = 2.0 * M_PI;
    for (long j = 0; j < n; ++j) {
      const long jj = j <= n / 2 ? j : j - n;
      const double k = two_pi * static_cast<double>(jj) / width;
      // u_t = -i u_xx  =>  each mode rotates by e^{+i k^2 dt}
      phase_[static_cast<size_t>(j)] = std::exp(Complex(0.0, k * k * dt));
    }
  }
  ~NlsSpectral() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  NlsSpectral(const NlsSpectral&) = delete;
  NlsSpectral& operator=(const NlsSpectral&) = delete;

  void linear_step(std::vector<Complex>& u) {
    auto* b = reinterpret_cast<Complex*>(buf_);
    for (long j = 0; j < n_; ++j) b[j] = u[static_cast<size_t>(j)];
    fftw_execute(fwd_);
    for (long j = 0; j < n_; ++j) b[j] *= phase_[static_cast<size_t>(j)];
    fftw_execute(bwd_);
    const double inv = 1.0 / static_cast<double>(n_);
    for (long j = 0; j < n_; ++j) u[static_cast<size_t>(j)] = b[j] * inv;
  }

 private:
  long n_;
  std::vector<Complex> phase_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

class NlsCrankNicolson {
 public:
  NlsCrankNicolson(long n, double h, double dt) : n_(n) {
    // (I - (dt/2) L) u' = (I + (dt/2) L) u with L = -i D2, periodic D2
    const Complex a = Complex(0.0, -1.0) * (dt / 2.0) / (h * h);
    Eigen::SparseMatrix<Complex> lhs(static_cast<int>(n), static_cast<int>(n));
    rhs_.resize(static_cast<int>(n), static_cast<int>(n));
    std::vector<Eigen::Triplet<Complex>> tl, tr;
    for (int r = 0; r < n; ++r) {
      const int lm = (r + static_cast<int>(n) - 1) % static_cast<int>(n);
      const int rp = (r + 1) % static_cast<int>(n);
      tl.emplace_back(r, r, 1.0 + 2.0 * a);
      tl.emplace_back(r, lm, -a);
      tl.emplace_back(r, rp, -a);
      tr.emplace_back(r, r, 1.0 - 2.0 * a);
      tr.emplace_back(r, lm, a);
      tr.emplace_back(r, rp, a);
    }
    lhs.setFromTriplets(tl.begin(), tl.end());
    rhs_.setFromTriplets(tr.begin(), tr.end());
    solver_.compute(lhs);
    if (solver_.info() != Eigen::Success)
      throw NumericalError("crank-nicolson factorization failed");
  }

  void linear_step(std::vector<Complex>& u) {
    Eigen::VectorXcd v(n_);
    for (long j = 0; j < n_; ++j) v(static_cast<int>(j)) = u[static_cast<size_t>(j)];
    Eigen::VectorXcd w = solver_.solve(rhs_ * v);
    if (solver_.info() != Eigen::Success)
      throw NumericalError("crank-nicolson solve failed");
    for (long j = 0; j < n_; ++j) u[static_cast<size_t>(j)] = w(static_cast<int>(j));
  }

 private:
  long n_;
  Eigen::SparseMatrix<Complex> rhs_;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> solver_;
};

}  // namespace detail_sim

inline NlsRun nls_solve(const std::function<Complex(double)>& u0, const NlsConfig& cfg) {
  if (!u0) throw ConfigError("nls needs an initial profile");
  const Domain dom = nls_grid_domain(cfg);
  const long n = dom.sample_count(0);
  const long nt = cfg.steps + 1;
  const double width = cfg.x_hi - cfg.x_lo;

  std::vector<Complex> u(static_cast<size_t>(n));
  for (long j = 0; j < n; ++j) u[static_cast<size_t>(j)] = u0(dom.sample_x(0, j));

  auto mass = [&] {
    double s = 0.0;
    for (const Complex& z : u) s += z.real() * z.real() + z.imag() * z.imag();
    return s * cfg.h;
  };
  auto guard = [&](long step) {
    for (const Complex& z : u)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > 1e6)
        throw NumericalError("nls solution diverged at step " + std::to_string(step));
  };
  guard(0);

  NlsRun run;
  run.mass_initial = mass();

  std::vector<Complex> history(static_cast<size_t>(n * nt));
  auto record = [&](long step) {
    for (long j = 0; j < n; ++j)
      history[static_cast<size_t>(j * nt + step)] = u[static_cast<size_t>(j)];
  };
  record(0);

  std::unique_ptr<detail_sim::NlsSpectral> spectral;
  std::unique_ptr<detail_sim::NlsCrankNicolson> cn;
  if (cfg.method == NlsMethod::Spectral)
    spectral = std::make_unique<detail_sim::NlsSpectral>(n, width, cfg.dt);
  else
    cn = std::make_unique<detail_sim::NlsCrankNicolson>(n, cfg.h, cfg.dt);

  for (long step = 1; step <= cfg.steps; ++step) {
    detail_sim::nls_nonlinear_half(u, cfg.dt);
    if (spectral)
      spectral->linear_step(u);
    else
      cn->linear_step(u);
    detail_sim::nls_nonlinear_half(u, cfg.dt);
    guard(step);
    run.mass_drift = std::max(run.mass_drift, std::abs(mass() - run.mass_initial));
    record(step);
  }

  run.u = Field::grid(dom, 1, 1, Region::full(dom), std::move(history));
  return run;
}

// ---------------------------------------------------------------------------
// sg: theta' recursion integrated as an ODE chain. The flat connection
// forces d/dt theta_{n+1} = d/dt theta_n + 4 gamma sin((theta_{n+1} +
// theta_n)/2), so given a drive for site 0 the rates are recursive and RK4
// advances the chain with O(dt^4) error.
// ---------------------------------------------------------------------------

struct SgConfig {
  long sites = 64;
  double dt = 1e-3;
  long steps = 400;
  double gamma = 1.0;
};

inline Field sg_integrate(const std::vector<double>& theta0,
                          const std::function<double(double)>& drive,
                          const SgConfig& cfg) {
  const long n = static_cast<long>(theta0.size());
  if (n < 2) throw ConfigError("sg chain needs at least 2 sites");
  if (cfg.steps < 1 || !(cfg.dt > 0.0)) throw ConfigError("sg needs steps >= 1, dt > 0");
  if (!drive) throw ConfigError("sg needs a drive for site 0");

  auto rates = [&](const std::vector<double>& th, double t, std::vector<double>& v) {
    v[0] = drive(t);
    for (long k = 0; k + 1 < n; ++k)
      v[static_cast<size_t>(k + 1)] =
          v[static_cast<size_t>(k)] +
          4.0 * cfg.gamma *
              std::sin(0.5 * (th[static_cast<size_t>(k + 1)] + th[static_cast<size_t>(k)]));
  };

  const long nt = cfg.steps + 1;
  std::vector<Complex> history(static_cast<size_t>(n * nt));
  std::vector<double> th = theta0;
  std::vector<double> k1(static_cast<size_t>(n)), k2(k1), k3(k1), k4(k1), tmp(k1);

  auto record = [&](long step) {
    for (long j = 0; j < n; ++j)
      history[static_cast<size_t>(j * nt + step)] = th[static_cast<size_t>(j)];
  };
  auto guard = [&](long step) {
    for (double v : th)
      if (!std::isfinite(v) || std::abs(v) > 1e6)
        throw NumericalError("sg chain diverged at step " + std::to_string(step));
  };
  guard(0);
  record(0);

  for (long step = 1; step <= cfg.steps; ++step) {
    const double t = static_cast<double>(step - 1) * cfg.dt;
    rates(th, t, k1);
    for (long j = 0; j < n; ++j)
      tmp[static_cast<size_t>(j)] = th[static_cast<size_t>(j)] + 0.5 * cfg.dt * k1[static_cast<size_t>(j)];
    rates(tmp, t + 0.5 * cfg.dt, k2);
    for (long j = 0; j < n; ++j)
      tmp[static_cast<size_t>(j)] = th[static_cast<size_t>(j)] + 0.5 * cfg.dt * k2[static_cast<size_t>(j)];
    rates(tmp, t + 0.5 * cfg.dt, k3);
    for (long j = 0; j < n; ++j)
      tmp[static_cast<size_t>(j)] = th[static_cast<size_t>(j)] + cfg.dt * k3[static_cast<size_t>(j)];
    rates(tmp, t + cfg.dt, k4);
    for (long j = 0; j < n; ++j)
      th[static_cast<size_t>(j)] +=
          (cfg.dt / 6.0) * (k1[static_cast<size_t>(j)] + 2.0 * k2[static_cast<size_t>(j)] +
                            2.0 * k3[static_cast<size_t>(j)] + k4[static_cast<size_t>(j)]);
    guard(step);
    record(step);
  }

  Domain dom = make_domain({{0, n - 1}},
                           {{0.0, static_cast<double>(cfg.steps) * cfg.dt, cfg.dt}});
  return Field::grid(dom, 1, 1, Region::full(dom), std::move(history));
}

// ---------------------------------------------------------------------------
// toda: q_{m+1,n} = 2 q_{m,n} - q_{m-1,n}
//                 + ln[(e^{q_{m,n+1}-q_{m,n}} + 1)/(e^{q_{m,n}-q_{m,n-1}} + 1)]
// advanced exactly (the recursion is explicit), periodic in n. Returns q on
// the full (m, n) box; u = e^q.
// ---------------------------------------------------------------------------

struct TodaConfig {
  long m_layers = 64;  // total layers including the two initial rows
  long n_sites = 64;
};

inline Field toda_evolve(const std::vector<double>& q0, const std::vector<double>& q1,
                         const TodaConfig& cfg) {
  const long n = cfg.n_sites;
  if (n < 3) throw ConfigError("toda chain needs at least 3 sites");
  if (cfg.m_layers < 3) throw ConfigError("toda needs at least 3 layers");
  if (static_cast<long>(q0.size()) != n || static_cast<long>(q1.size()) != n)
    throw ConfigError("toda initial rows must have n_sites entries");

  const long m = cfg.m_layers;
  std::vector<double> q(static_cast<size_t>(m * n));
  auto at = [&](long mm, long nn) -> double& {
    return q[static_cast<size_t>(mm * n + nn)];
  };
  for (long j = 0; j < n; ++j) {
    at(0, j) = q0[static_cast<size_t>(j)];
    at(1, j) = q1[static_cast<size_t>(j)];
  }
  auto guard_exp = [](double z, long mm) {
    if (!std::isfinite(z) || std::abs(z) > 500.0)
      throw NumericalError("toda exponent overflow at layer " + std::to_string(mm));
    return z;
  };
  for (long mm = 2; mm < m; ++mm) {
    for (long j = 0; j < n; ++j) {
      const long jp = (j + 1) % n;
      const long jm = (j + n - 1) % n;
      const double up = guard_exp(at(mm - 1, jp) - at(mm - 1, j), mm);
      const double dn = guard_exp(at(mm - 1, j) - at(mm - 1, jm), mm);
      at(mm, j) = 2.0 * at(mm - 1, j) - at(mm - 2, j) +
                  std::log((std::exp(up) + 1.0) / (std::exp(dn) + 1.0));
      if (!std::isfinite(at(mm, j)) || std::abs(at(mm, j)) > 500.0)
        throw NumericalError("toda solution diverged at layer " + std::to_string(mm));
    }
  }

  Domain dom = make_domain({{0, m - 1}, {0, n - 1}}, {});
  std::vector<Complex> samples(q.size());
  for (size_t k = 0; k < q.size(); ++k) samples[k] = q[k];
  return Field::grid(dom, 1, 1, Region::full(dom), std::move(samples));
}

/// Least-squares slope of log(err) against log(h); the observed
/// convergence order of a refinement study.
inline double fit_order(const std::vector<std::pair<double, double>>& h_err) {
  if (h_err.size() < 2) throw ConfigError("order fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [h, e] : h_err) {
    if (!(h > 0.0) || !(e > 0.0))
      throw ConfigError("order fit needs positive spacings and errors");
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(h_err.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace curvkit
