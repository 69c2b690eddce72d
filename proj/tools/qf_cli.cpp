#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "qf/criterion.hpp"
#include "qf/io.hpp"
#include "qf/kovalevskaya.hpp"
#include "qf/quartic_ode.hpp"

using namespace qf;

namespace {

std::pair<int, int> parse_grid(const std::string& s) {
  size_t x = s.find('x');
  if (x == std::string::npos)
    throw_validation("BAD_GRID", "grid must look like 30x30, got \"" + s + "\"");
  try {
    int n = std::stoi(s.substr(0, x));
    int m = std::stoi(s.substr(x + 1));
    if (n < 2 || m < 2) throw_validation("BAD_GRID", "grid sides must be at least 2");
    return {n, m};
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw_validation("BAD_GRID", "grid must look like 30x30, got \"" + s + "\"");
  }
}

Real field_number(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j[key].is_number())
    throw_validation("BAD_FIELD", std::string("missing numeric field \"") + key + "\"");
  return j[key].get<double>();
}

std::pair<Real, Real> parse_pair(const std::string& s, const char* what) {
  size_t c = s.find(',');
  if (c == std::string::npos)
    throw_validation("BAD_PAIR", std::string(what) + " must look like 0.1,0.2");
  try {
    return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw_validation("BAD_PAIR", std::string(what) + " must look like 0.1,0.2");
  }
}

struct ConstructArgs {
  std::string family, out = "system.json";
  Real a = 0, b = 1, p = 0;
};

int cmd_construct(const ConstructArgs& args) {
  ChartedSystem sys;
  if (args.family == "base")
    sys = build_base(args.a, args.b);
  else if (args.family == "shifted")
    sys = build_shifted(args.a, args.b, args.p);
  else if (args.family == "kovalevskaya")
    sys = kov_chart_system();
  else if (args.family == "kovalevskaya-embedded")
    sys = embedded_chart_system();
  else
    throw_validation("BAD_FAMILY",
                     "--family must be base, shifted, kovalevskaya or "
                     "kovalevskaya-embedded");
  write_json(args.out, system_to_json(sys));
  std::printf("wrote %s (kind=%s)\n", args.out.c_str(), sys.params.kind.c_str());
  return 0;
}

struct CriterionArgs {
  std::string system, out = "criterion.json", grid = "30x30", xi_mode = "auto";
  Real d = 0, c = 1, d1 = 0, p = 0;
  Real y_lo = -2, y_hi = 2;
};

int cmd_check_criterion(const CriterionArgs& args) {
  ChartedSystem sys = load_system(args.system);
  auto [n_phi, n_y] = parse_grid(args.grid);
  if (!(args.y_lo < args.y_hi)) throw_validation("BAD_PARAMS", "need y_lo < y_hi");
  if (sys.params.kind != "base" && sys.params.kind != "shifted")
    throw_validation("BAD_SYSTEM_KIND",
                     "the criterion scan covers the polynomial families (base, shifted)");

  Real pad = 0.2 * (args.y_hi - args.y_lo);
  auto us = std::make_shared<USolution>(solve_u(FamilyParams{sys.params.a, sys.params.b, 0, +1},
                                                0.0, args.y_lo - pad, args.y_hi + pad, 1e-12));
  FAnsatz an;
  an.u_jet = [us](Real y) { return us->jet(y); };
  an.d = args.d;
  an.c = args.c;
  an.d1 = args.d1;
  an.p = args.p;
  if (args.xi_mode == "auto")
    an.xi_mode = args.d == 0 ? XiMode::d_zero : XiMode::d_nonzero;
  else if (args.xi_mode == "d-zero")
    an.xi_mode = XiMode::d_zero;
  else if (args.xi_mode == "d-nonzero")
    an.xi_mode = XiMode::d_nonzero;
  else
    throw_validation("BAD_PARAMS", "--xi-mode must be auto, d-zero or d-nonzero");

  CriterionReport rep = criterion_scan(an, n_phi, n_y, 0, 2 * M_PI, args.y_lo, args.y_hi);
  Json j;
  j["schema"] = 1;
  j["system"] = Json{{"kind", sys.params.kind}, {"a", sys.params.a}, {"b", sys.params.b},
                     {"p", sys.params.p}};
  j["closure"] = Json{{"d", args.d}, {"c", args.c}, {"d1", args.d1}, {"p", args.p},
                      {"xi_mode", an.xi_mode == XiMode::d_zero ? "d-zero" : "d-nonzero"}};
  j["grid"] = Json::array({n_phi, n_y});
  j["y_window"] = Json::array({args.y_lo, args.y_hi});
  j["max_rel_residual"] = rep.max_rel;
  j["mean_rel_residual"] = rep.mean_rel;
  j["skipped"] = rep.skipped;
  j["total"] = rep.total;
  write_json(args.out, j);
  std::printf("wrote %s (max_rel=%.3e over %d points, %d skipped)\n", args.out.c_str(),
              rep.max_rel, rep.total, rep.skipped);
  return 0;
}

struct SimulateArgs {
  std::string system, out = "traj.csv", q0 = "0,0.3", p0 = "0,0.1", integral, chart;
  Real T = 10, dt = 1e-3;
  std::string section = "q1=0", direction = "+";
  bool do_poincare = false;
  std::uint64_t seed = 12345;
};

int cmd_simulate(const SimulateArgs& args) {
  ChartedSystem sys = load_system(args.system);
  auto [q1, q2] = parse_pair(args.q0, "--q0");
  auto [p1, p2] = parse_pair(args.p0, "--p0");
  if (!(args.T > 0) || !(args.dt > 0)) throw_validation("BAD_PARAMS", "need T > 0 and dt > 0");

  PhaseState s0{0, q1, q2, p1, p2};
  if (!args.chart.empty()) s0.chart = sys.chart_index(args.chart);

  std::unique_ptr<QuarticAnsatz> az;
  if (!args.integral.empty())
    az = std::make_unique<QuarticAnsatz>(integral_from_json(read_json(args.integral), sys));

  IntegratorConfig cfg;
  cfg.dt = args.dt;
  Trajectory traj = integrate(sys, s0, args.T, cfg);

  if (args.do_poincare) {
    Section sec;
    std::string spec = args.section;
    size_t eq = spec.find('=');
    if (eq == std::string::npos)
      throw_validation("BAD_SECTION", "--section must look like q1=0 or q2=0.5");
    std::string coord = spec.substr(0, eq);
    if (coord == "q1")
      sec.coord = 0;
    else if (coord == "q2")
      sec.coord = 1;
    else
      throw_validation("BAD_SECTION", "section coordinate must be q1 or q2");
    try {
      sec.value = std::stod(spec.substr(eq + 1));
    } catch (const std::exception&) {
      throw_validation("BAD_SECTION", "section value must be numeric");
    }
    if (args.direction == "+")
      sec.direction = +1;
    else if (args.direction == "-")
      sec.direction = -1;
    else if (args.direction == "both")
      sec.direction = 0;
    else
      throw_validation("BAD_SECTION", "--direction must be +, - or both");
    auto crossings = poincare(sys, traj, sec);
    write_crossings_csv(args.out, sys, crossings);
    std::printf("wrote %s (%zu crossings from %zu samples)\n", args.out.c_str(),
                crossings.size(), traj.samples.size());
  } else {
    write_trajectory_csv(args.out, sys, traj, az.get());
    std::printf("wrote %s (%zu samples, %zu chart switches)\n", args.out.c_str(),
                traj.samples.size(), traj.switches.size());
    if (az && traj.failure.empty()) {
      try {
        std::printf("certified drift = %s\n",
                    fmt17(certify(*az, az->coeffs, traj, args.seed)).c_str());
      } catch (const Error& e) {
        std::printf("certification skipped: %s\n", e.what());
      }
    }
  }
  if (!traj.failure.empty()) {
    throw_numerical("TRUNCATED_RUN", "integration stopped early: " + traj.failure);
  }
  return 0;
}

struct FindArgs {
  std::string system, out = "integral.json", chart, method = "svd";
  int degree = 4, fourier = 6, radial = 48;
  Real y_lo = 0, y_hi = 0;  // 0,0: take the chart's suggested window
  Real threshold = 1e-8;
};

int cmd_find_integral(const FindArgs& args) {
  ChartedSystem sys = load_system(args.system);
  QuarticAnsatz az;
  az.m = args.degree;
  az.M = args.fourier;
  az.N = args.radial;
  az.chart = args.chart.empty() ? 0 : sys.chart_index(args.chart);
  if (args.y_lo == 0 && args.y_hi == 0) {
    az.y_lo = sys.charts[az.chart].win_lo;
    az.y_hi = sys.charts[az.chart].win_hi;
  } else {
    az.y_lo = args.y_lo;
    az.y_hi = args.y_hi;
  }
  NullspaceMethod method;
  if (args.method == "svd")
    method = NullspaceMethod::svd;
  else if (args.method == "normal")
    method = NullspaceMethod::normal;
  else
    throw_validation("BAD_PARAMS", "--method must be svd or normal");

  BracketOperator op(sys, az);
  auto triv = trivial_vectors(sys, az);
  NullspaceReport rep = find_integrals(op, triv, args.threshold, method);
  write_json(args.out, integral_to_json(sys, az, rep));
  std::printf("wrote %s (raw=%d deflated=%d gap=%.3e)\n", args.out.c_str(), rep.raw_dim,
              rep.deflated_dim, rep.gap);
  if (rep.deflated_dim > 1)
    std::printf("note: %d independent new integrals; the file stores the first\n",
                rep.deflated_dim);
  return 0;
}

struct KovMapArgs {
  std::string out = "kov_map.json", grid = "50x50";
  Real u_lo = 0.05, u_hi = 20;
};

int cmd_kov_map(const KovMapArgs& args) {
  auto [n_u, n_phi] = parse_grid(args.grid);
  if (!(0 < args.u_lo && args.u_lo < args.u_hi))
    throw_validation("BAD_PARAMS", "need 0 < u_lo < u_hi");
  KovMatchReport rep = match_kovalevskaya(n_u, n_phi, args.u_lo, args.u_hi);
  Json j;
  j["schema"] = 1;
  j["grid"] = Json::array({n_u, n_phi});
  j["u_window"] = Json::array({args.u_lo, args.u_hi});
  j["max_metric_rel"] = rep.max_metric_rel;
  j["max_potential_rel"] = rep.max_potential_rel;
  j["kappa_fit"] = rep.kappa_fit;
  j["kappa_tilde_fit"] = rep.kappa_tilde_fit;
  write_json(args.out, j);
  std::printf("wrote %s (metric=%.3e potential=%.3e)\n", args.out.c_str(), rep.max_metric_rel,
              rep.max_potential_rel);
  return 0;
}

struct ReportArgs {
  std::string criterion, trajectory, integral, out = "report.json";
  Real tol_criterion = 1e-7, tol_drift = 1e-6, min_gap = 1e3;
};

int cmd_report(const ReportArgs& args) {
  Json jc = read_json(args.criterion);
  Json ji = read_json(args.integral);
  auto rows = read_trajectory_csv(args.trajectory);
  if (rows.empty()) throw_validation("BAD_CSV", args.trajectory + " has no data rows");

  Real crit = field_number(jc, "max_rel_residual");
  Real gap = ji.contains("gap") && ji["gap"].is_number()
                 ? ji["gap"].get<double>()
                 : std::numeric_limits<Real>::infinity();
  int deflated = int(field_number(ji, "deflated_dim"));

  Real h0 = rows.front().H;
  Real h_scale = std::max(std::abs(h0), 1e-12);
  Real h_drift = 0;
  bool any_f = false;
  Real f0 = 0, f_min = 0, f_max = 0, f_drift = 0;
  for (const TrajRow& r : rows) {
    h_drift = std::max(h_drift, std::abs(r.H - h0) / h_scale);
    if (r.F) {
      if (!any_f) {
        any_f = true;
        f0 = *r.F;
        f_min = f_max = f0;
      }
      f_min = std::min(f_min, *r.F);
      f_max = std::max(f_max, *r.F);
      f_drift = std::max(f_drift, std::abs(*r.F - f0));
    }
  }
  if (any_f) {
    Real f_scale = std::max(std::abs(f0), f_max - f_min);
    f_drift /= std::max(f_scale, Real(1e-12));
  }

  auto check = [](const char* name, Real value, Real bound, bool pass) {
    return Json{{"name", name}, {"value", value}, {"bound", bound}, {"pass", pass}};
  };
  Json checks = Json::array();
  checks.push_back(check("criterion-residual", crit, args.tol_criterion,
                         crit < args.tol_criterion));
  checks.push_back(check("energy-drift", h_drift, args.tol_drift, h_drift < args.tol_drift));
  checks.push_back(check("integral-drift", any_f ? f_drift : -1, args.tol_drift,
                         any_f && f_drift < args.tol_drift));
  checks.push_back(
      check("nullspace-gap", gap, args.min_gap, deflated >= 1 && gap > args.min_gap));

  bool all = true;
  for (auto& c : checks) all = all && c["pass"].get<bool>();
  Json j;
  j["schema"] = 1;
  j["inputs"] = Json{{"criterion", args.criterion},
                     {"trajectory", args.trajectory},
                     {"integral", args.integral}};
  j["checks"] = std::move(checks);
  j["pass"] = all;
  write_json(args.out, j);
  std::printf("wrote %s (%s)\n", args.out.c_str(), all ? "all checks pass" : "FAILING");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"families of integrable systems on the two-sphere"};
  app.require_subcommand(1);
  std::uint64_t seed = 12345;
  app.add_option("--seed", seed, "seed for randomized grids");

  ConstructArgs ca;
  auto* sc_construct = app.add_subcommand("construct", "build a system file");
  sc_construct
      ->add_option("--family", ca.family,
                   "base | shifted | kovalevskaya | kovalevskaya-embedded")
      ->required();
  sc_construct->add_option("--a", ca.a, "quadratic coefficient");
  sc_construct->add_option("--b", ca.b, "constant coefficient");
  sc_construct->add_option("--p", ca.p, "shift parameter");
  sc_construct->add_option("--out", ca.out, "output path");

  CriterionArgs cc;
  auto* sc_crit = app.add_subcommand("check-criterion", "scan the integrability residual");
  sc_crit->add_option("--system", cc.system, "system JSON")->required();
  sc_crit->add_option("--grid", cc.grid, "scan grid, e.g. 30x30");
  sc_crit->add_option("--xi-mode", cc.xi_mode, "auto | d-zero | d-nonzero");
  sc_crit->add_option("--d", cc.d, "closure constant d");
  sc_crit->add_option("--c", cc.c, "closure constant c");
  sc_crit->add_option("--d1", cc.d1, "closure constant d1");
  sc_crit->add_option("--p", cc.p, "closure constant p");
  sc_crit->add_option("--y-lo", cc.y_lo, "scan window low edge");
  sc_crit->add_option("--y-hi", cc.y_hi, "scan window high edge");
  sc_crit->add_option("--out", cc.out, "output path");

  SimulateArgs sa;
  auto* sc_sim = app.add_subcommand("simulate", "integrate and record a trajectory");
  sc_sim->add_option("--system", sa.system, "system JSON")->required();
  sc_sim->add_option("--q0", sa.q0, "initial q1,q2");
  sc_sim->add_option("--p0", sa.p0, "initial p1,p2");
  sc_sim->add_option("--T", sa.T, "final time");
  sc_sim->add_option("--dt", sa.dt, "step size");
  sc_sim->add_option("--integral", sa.integral, "integral JSON to co-record");
  sc_sim->add_option("--chart", sa.chart, "starting chart name");
  sc_sim->add_option("--out", sa.out, "output CSV");

  SimulateArgs pa;
  pa.out = "crossings.csv";
  auto* sc_poin = app.add_subcommand("poincare", "record section crossings");
  sc_poin->add_option("--system", pa.system, "system JSON")->required();
  sc_poin->add_option("--q0", pa.q0, "initial q1,q2");
  sc_poin->add_option("--p0", pa.p0, "initial p1,p2");
  sc_poin->add_option("--T", pa.T, "final time");
  sc_poin->add_option("--dt", pa.dt, "step size");
  sc_poin->add_option("--chart", pa.chart, "starting chart name");
  sc_poin->add_option("--section", pa.section, "coordinate section, e.g. q1=0");
  sc_poin->add_option("--direction", pa.direction, "+ | - | both");
  sc_poin->add_option("--out", pa.out, "output CSV");

  FindArgs fa;
  auto* sc_find = app.add_subcommand("find-integral", "search for polynomial invariants");
  sc_find->add_option("--system", fa.system, "system JSON")->required();
  sc_find->add_option("--degree", fa.degree, "max momentum degree");
  sc_find->add_option("--fourier", fa.fourier, "angular order");
  sc_find->add_option("--radial", fa.radial, "radial collocation size");
  sc_find->add_option("--y-lo", fa.y_lo, "window low edge (default: chart window)");
  sc_find->add_option("--y-hi", fa.y_hi, "window high edge");
  sc_find->add_option("--chart", fa.chart, "chart name (default: first chart)");
  sc_find->add_option("--threshold", fa.threshold, "relative nullspace cut");
  sc_find->add_option("--method", fa.method, "svd | normal");
  sc_find->add_option("--out", fa.out, "output path");

  KovMapArgs ka;
  auto* sc_kov = app.add_subcommand("kovalevskaya-map", "compare against the embedded top");
  sc_kov->add_option("--grid", ka.grid, "comparison grid, e.g. 50x50");
  sc_kov->add_option("--u-lo", ka.u_lo, "chart coordinate low edge");
  sc_kov->add_option("--u-hi", ka.u_hi, "chart coordinate high edge");
  sc_kov->add_option("--out", ka.out, "output path");

  ReportArgs ra;
  auto* sc_rep = app.add_subcommand("report", "collate pipeline artifacts");
  sc_rep->add_option("--criterion", ra.criterion, "criterion JSON")->required();
  sc_rep->add_option("--trajectory", ra.trajectory, "trajectory CSV")->required();
  sc_rep->add_option("--integral", ra.integral, "integral JSON")->required();
  sc_rep->add_option("--tol-criterion", ra.tol_criterion, "criterion residual bound");
  sc_rep->add_option("--tol-drift", ra.tol_drift, "relative drift bound");
  sc_rep->add_option("--min-gap", ra.min_gap, "required nullspace gap");
  sc_rep->add_option("--out", ra.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::fprintf(stderr, "ERROR BAD_ARGS %s\n", e.what());
    return 2;
  }

  try {
    if (*sc_construct) return cmd_construct(ca);
    if (*sc_crit) return cmd_check_criterion(cc);
    if (*sc_sim) {
      sa.seed = seed;
      return cmd_simulate(sa);
    }
    if (*sc_poin) {
      pa.do_poincare = true;
      pa.seed = seed;
      return cmd_simulate(pa);
    }
    if (*sc_find) return cmd_find_integral(fa);
    if (*sc_kov) return cmd_kov_map(ka);
    if (*sc_rep) return cmd_report(ra);
  } catch (const Error& e) {
    std::fprintf(stderr, "ERROR %s\n", e.what());  // what() is "CODE: detail"
    switch (e.kind()) {
      case ErrorKind::Validation:
        return 2;
      case ErrorKind::Io:
        return 3;
      case ErrorKind::Numerical:
        return 4;
    }
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ERROR INTERNAL %s\n", e.what());
    return 4;
  }
  return 0;
}
