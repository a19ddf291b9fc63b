#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "curvkit/curvkit.hpp"

namespace {

using namespace curvkit;

int g_rc = 0;

void emit(const Report& rep, const std::string& out_path) {
  const std::string text = rep.serialize();
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path, std::ios::binary);
    os << text;
    if (!os) throw ConfigError("cannot write report to " + out_path);
  }
  g_rc = rep.pass ? 0 : 1;
}

void write_outputs(const Field& f, const std::string& out, const std::string& csv) {
  write_field_binary(f, out);
  if (!csv.empty()) write_field_csv(f, csv);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-discrete connection calculus: identity suites, integrable "
               "example verification, and solution generators"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // ---- identities ---------------------------------------------------------
  IdentityOptions id_opt;
  std::string id_out;
  auto* cmd_id = app.add_subcommand("identities", "run the randomized identity suites");
  cmd_id->add_option("--seed", id_opt.seed, "rng seed");
  cmd_id->add_option("--cases", id_opt.cases, "cases per suite (default 100)");
  cmd_id->add_option("--tol", id_opt.tol, "worst-case tolerance (default 1e-12)");
  cmd_id->add_option("--out", id_out, "write the report here instead of stdout");
  cmd_id->callback([&] {
    if (id_opt.cases < 1) throw ConfigError("--cases must be at least 1");
    emit(identities_report(id_opt), id_out);
  });

  // ---- verify --------------------------------------------------------------
  auto* cmd_verify = app.add_subcommand("verify", "zero-curvature verification");
  cmd_verify->require_subcommand(1);

  NlsVerifyOptions vn;
  std::string vn_out, vn_method = "spectral";
  bool vn_no_solver = false;
  auto* cmd_vn = cmd_verify->add_subcommand("nls", "focusing cubic Schrodinger pair");
  cmd_vn->add_flag("--as-printed", vn.as_printed,
                   "use the transposed derivative entries in the time matrix");
  cmd_vn->add_option("--grid-order", vn.grid_order, "stencil order for the refinement study")
      ->check(CLI::IsMember({2, 4}));
  cmd_vn->add_option("--spacings", vn.spacings, "refinement spacings");
  cmd_vn->add_option("--x-lo", vn.solver.x_lo, "solver cell lower edge");
  cmd_vn->add_option("--x-hi", vn.solver.x_hi, "solver cell upper edge");
  cmd_vn->add_option("--dx", vn.solver.h, "solver spacing");
  cmd_vn->add_option("--dt", vn.solver.dt, "solver time step");
  cmd_vn->add_option("--steps", vn.solver.steps, "solver step count");
  cmd_vn->add_option("--method", vn_method, "solver linear substep: spectral | cn");
  cmd_vn->add_flag("--no-solver", vn_no_solver, "skip the tracking/mass check");
  cmd_vn->add_option("--tol-analytic", vn.tol_analytic, "analytic residual tolerance");
  cmd_vn->add_option("--tol-solver", vn.tol_solver, "tracking error tolerance");
  cmd_vn->add_option("--tol-mass", vn.tol_mass, "mass drift tolerance");
  cmd_vn->add_option("--order-window", vn.order_window, "allowed fitted-order deviation");
  cmd_vn->add_option("--dump", vn.dump_path, "csv dump of the solver field");
  cmd_vn->add_option("--out", vn_out, "write the report here instead of stdout");
  cmd_vn->callback([&] {
    if (vn_method == "spectral")
      vn.solver.method = NlsMethod::Spectral;
    else if (vn_method == "cn" || vn_method == "crank-nicolson")
      vn.solver.method = NlsMethod::CrankNicolson;
    else
      throw ConfigError("unknown --method " + vn_method);
    vn.with_solver = !vn_no_solver;
    emit(verify_nls(vn), vn_out);
  });

  SgVerifyOptions vs;
  std::string vs_out;
  auto* cmd_vs = cmd_verify->add_subcommand("sg", "semi-discrete sine-Gordon pair");
  cmd_vs->add_option("--sites", vs.sites, "chain length");
  cmd_vs->add_option("--dt", vs.dt, "integrator time step");
  cmd_vs->add_option("--steps", vs.steps, "integrator step count");
  cmd_vs->add_option("--gamma", vs.gamma, "coupling");
  cmd_vs->add_option("--seed", vs.seed, "initial-profile seed");
  cmd_vs->add_option("--amp", vs.amp, "initial-profile amplitude");
  cmd_vs->add_option("--order", vs.order, "time-stencil order")->check(CLI::IsMember({2, 4}));
  cmd_vs->add_option("--k", vs.wavenumbers, "spectral-parameter scan values");
  cmd_vs->add_option("--c", vs.coefficients, "reduced-equation coefficient scan values");
  cmd_vs->add_option("--tol-residual", vs.tol_residual, "curvature residual tolerance");
  cmd_vs->add_option("--tol-offdiag", vs.tol_offdiag, "off-diagonal tolerance");
  cmd_vs->add_option("--tol-reduced", vs.tol_reduced, "reduced-equation tolerance");
  cmd_vs->add_option("--scan-floor", vs.scan_floor, "wrong coefficients must exceed this");
  cmd_vs->add_option("--dump", vs.dump_path, "csv dump of the integrated chain");
  cmd_vs->add_option("--out", vs_out, "write the report here instead of stdout");
  cmd_vs->callback([&] { emit(verify_sg(vs), vs_out); });

  TodaVerifyOptions vt;
  std::string vt_out;
  auto* cmd_vt = cmd_verify->add_subcommand("toda", "doubly discrete Toda pair");
  cmd_vt->add_option("--layers", vt.layers, "evolution layers");
  cmd_vt->add_option("--sites", vt.sites, "sites per layer");
  cmd_vt->add_option("--seed", vt.seed, "initial-row seed");
  cmd_vt->add_option("--amp", vt.amp, "initial bump amplitude");
  cmd_vt->add_option("--lambda", vt.lambdas, "spectral-parameter scan values");
  cmd_vt->add_option("--tol-residual", vt.tol_residual, "curvature residual tolerance");
  cmd_vt->add_option("--tol-structural", vt.tol_structural, "structural-zero tolerance");
  cmd_vt->add_option("--perturbation", vt.perturbation, "single-site defect size");
  cmd_vt->add_option("--perturbation-floor", vt.perturbation_floor,
                     "defective data must exceed this");
  cmd_vt->add_option("--dump", vt.dump_path, "csv dump of the evolved lattice");
  cmd_vt->add_option("--out", vt_out, "write the report here instead of stdout");
  cmd_vt->callback([&] { emit(verify_toda(vt), vt_out); });

  // ---- simulate -------------------------------------------------------------
  auto* cmd_sim = app.add_subcommand("simulate", "run a solver and write the field");
  cmd_sim->require_subcommand(1);

  NlsConfig sn_cfg;
  std::string sn_profile = "soliton", sn_method = "spectral", sn_out, sn_csv;
  auto* cmd_sn = cmd_sim->add_subcommand("nls", "Strang-split Schrodinger run");
  cmd_sn->add_option("--x-lo", sn_cfg.x_lo, "cell lower edge");
  cmd_sn->add_option("--x-hi", sn_cfg.x_hi, "cell upper edge");
  cmd_sn->add_option("--dx", sn_cfg.h, "spacing");
  cmd_sn->add_option("--dt", sn_cfg.dt, "time step");
  cmd_sn->add_option("--steps", sn_cfg.steps, "step count");
  cmd_sn->add_option("--method", sn_method, "linear substep: spectral | cn");
  cmd_sn->add_option("--profile", sn_profile, "initial data: soliton | zero");
  cmd_sn->add_option("--out", sn_out, "output field file")->required();
  cmd_sn->add_option("--csv", sn_csv, "also write a csv dump");
  cmd_sn->callback([&] {
    if (sn_method == "spectral")
      sn_cfg.method = NlsMethod::Spectral;
    else if (sn_method == "cn" || sn_method == "crank-nicolson")
      sn_cfg.method = NlsMethod::CrankNicolson;
    else
      throw ConfigError("unknown --method " + sn_method);
    std::function<Complex(double)> u0;
    if (sn_profile == "soliton")
      u0 = [](double x) { return Complex(1.0 / std::cosh(x), 0.0); };
    else if (sn_profile == "zero")
      u0 = [](double) { return Complex(0.0, 0.0); };
    else
      throw ConfigError("unknown --profile " + sn_profile);
    NlsRun run = nls_solve(u0, sn_cfg);
    write_outputs(run.u, sn_out, sn_csv);
    std::cout << "wrote " << sn_out << ": " << run.u.region().points()
              << " points, mass drift " << run.mass_drift << "\n";
  });

  SgConfig ss_cfg;
  std::uint64_t ss_seed = 20250802;
  double ss_amp = 0.4;
  std::string ss_profile = "random", ss_out, ss_csv;
  auto* cmd_ss = cmd_sim->add_subcommand("sg", "driven-edge chain integration");
  cmd_ss->add_option("--sites", ss_cfg.sites, "chain length");
  cmd_ss->add_option("--dt", ss_cfg.dt, "time step");
  cmd_ss->add_option("--steps", ss_cfg.steps, "step count");
  cmd_ss->add_option("--gamma", ss_cfg.gamma, "coupling");
  cmd_ss->add_option("--seed", ss_seed, "profile seed");
  cmd_ss->add_option("--amp", ss_amp, "profile amplitude");
  cmd_ss->add_option("--theta0", ss_profile, "initial data: random | zero | pi");
  cmd_ss->add_option("--out", ss_out, "output field file")->required();
  cmd_ss->add_option("--csv", ss_csv, "also write a csv dump");
  cmd_ss->callback([&] {
    if (ss_cfg.sites < 2) throw ConfigError("--sites must be at least 2");
    std::vector<double> th0(static_cast<size_t>(ss_cfg.sites));
    if (ss_profile == "random") {
      Rng rng(ss_seed);
      for (auto& v : th0) v = rng.uniform(-ss_amp, ss_amp);
    } else if (ss_profile == "zero") {
      // already zero
    } else if (ss_profile == "pi") {
      for (auto& v : th0) v = M_PI;
    } else {
      throw ConfigError("unknown --theta0 " + ss_profile);
    }
    Field th = sg_integrate(th0, [](double) { return 0.0; }, ss_cfg);
    write_outputs(th, ss_out, ss_csv);
    std::cout << "wrote " << ss_out << ": " << th.region().points() << " points\n";
  });

  TodaConfig st_cfg;
  std::uint64_t st_seed = 20250803;
  double st_amp = 0.5;
  std::string st_rows = "bump", st_out, st_csv;
  auto* cmd_st = cmd_sim->add_subcommand("toda", "explicit lattice recursion");
  cmd_st->add_option("--layers", st_cfg.m_layers, "evolution layers");
  cmd_st->add_option("--sites", st_cfg.n_sites, "sites per layer");
  cmd_st->add_option("--seed", st_seed, "row seed");
  cmd_st->add_option("--amp", st_amp, "row amplitude");
  cmd_st->add_option("--rows", st_rows, "initial rows: bump | zero | random");
  cmd_st->add_option("--out", st_out, "output field file")->required();
  cmd_st->add_option("--csv", st_csv, "also write a csv dump");
  cmd_st->callback([&] {
    if (st_cfg.n_sites < 3) throw ConfigError("--sites must be at least 3");
    std::vector<double> q0(static_cast<size_t>(st_cfg.n_sites), 0.0);
    std::vector<double> q1 = q0;
    if (st_rows == "bump") {
      for (long j = 0; j < st_cfg.n_sites; ++j) {
        const double d = static_cast<double>(j - st_cfg.n_sites / 2);
        q0[static_cast<size_t>(j)] = st_amp * std::exp(-d * d / 16.0);
      }
      q1 = q0;
    } else if (st_rows == "random") {
      Rng rng(st_seed);
      for (auto& v : q0) v = rng.uniform(-st_amp, st_amp);
      for (auto& v : q1) v = rng.uniform(-st_amp, st_amp);
    } else if (st_rows != "zero") {
      throw ConfigError("unknown --rows " + st_rows);
    }
    Field q = toda_evolve(q0, q1, st_cfg);
    write_outputs(q, st_out, st_csv);
    std::cout << "wrote " << st_out << ": " << q.region().points() << " points\n";
  });

  // ---- dump ------------------------------------------------------------------
  std::string dp_in, dp_out;
  auto* cmd_dump = app.add_subcommand("dump", "convert a binary field file to csv");
  cmd_dump->add_option("input", dp_in, "binary field file")->required();
  cmd_dump->add_option("--out", dp_out, "csv output path")->required();
  cmd_dump->callback([&] {
    Field f = read_field_binary(dp_in);
    write_field_csv(f, dp_out);
    std::cout << "wrote " << dp_out << ": " << f.region().points() << " points\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return g_rc;
}
