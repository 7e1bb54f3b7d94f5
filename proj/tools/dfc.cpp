// Command-line driver: forward / value / check-reachable / backward /
// exact-control / optimal-control / verify-roundtrip over scenario files.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dfc/backward.hpp"
#include "dfc/extract.hpp"
#include "dfc/godunov.hpp"
#include "dfc/json_io.hpp"
#include "dfc/optimal.hpp"
#include "dfc/value_function.hpp"

namespace fs = std::filesystem;
using dfc::json;

namespace {

struct Cli {
  std::string scenario;
  std::string out_dir = "out";
  std::uint64_t seed = 0;  // 0 = take from scenario
  double dx = 0.0;         // 0 = take from scenario
  int threads = 0;
};

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

void write_report(const Cli& cli, const std::string& command, json report, bool pass) {
  report["schema_version"] = 1;
  report["command"] = command;
  report["pass"] = pass;
  report["generated_at"] = iso_now();  // the only non-deterministic field
  std::ofstream out(fs::path(cli.out_dir) / "report.json");
  out << report.dump(2) << "\n";
}

void write_fan_samples(const dfc::WaveFan& fan, const fs::path& path, double xlo, double xhi,
                       int n, std::vector<double> times) {
  std::ofstream csv(path);
  csv << "t,x,u,side,region\n";
  char buf[160];
  for (double t : times) {
    const double tq = std::fmin(std::fmax(t, 1e-9), fan.T() * (1.0 - 1e-12));
    for (int i = 0; i < n; ++i) {
      const double x = xlo + (xhi - xlo) * (i + 0.5) / n;
      const dfc::Region& r = fan.region_at(x, tq);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%c,%s\n", t, x, fan.eval(x, tq), r.side,
                    r.label.c_str());
      csv << buf;
    }
  }
}

void write_grid_csv(const dfc::GridSolution& g, std::ofstream& csv) {
  char buf[120];
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%c\n", g.time, g.x_center(i), g.u[i],
                  g.x_center(i) < 0 ? 'g' : 'f');
    csv << buf;
  }
}

json fan_residuals(const dfc::WaveFan& fan, int nt = 2000) {
  double worst_rh = 0.0;
  int entropy_bad = 0;
  for (int i = 0; i < nt; ++i) {
    const double t = fan.T() * (i + 0.5) / nt;
    worst_rh = std::fmax(worst_rh, fan.rh_residual(t));
    if (!fan.entropy_ok(t)) ++entropy_bad;
  }
  double worst_tp = -1.0;
  if (fan.r2_at_T() > 1e-9) {
    double prev = 1e300;
    worst_tp = 1e300;
    for (int i = 1; i <= 200; ++i) {
      const double x = fan.r2_at_T() * i / 201.0;
      const double tp = fan.t_plus_at_T(x);
      worst_tp = std::fmin(worst_tp, prev - tp);
      prev = tp;
    }
  }
  json r;
  r["rh_residual_max"] = worst_rh;
  r["entropy_violations"] = entropy_bad;
  r["t_plus_min_decrement"] = worst_tp;
  return r;
}

double support_halfwidth(const dfc::StepFunction& u0, const dfc::FluxPair& pair, double T) {
  double M = 1.0;
  for (double b : u0.breakpoints) M = std::fmax(M, std::fabs(b));
  double s = pair.i_plus_min();
  for (double v : {u0.min_value(), u0.max_value()}) {
    s = std::fmax(s, std::fabs(pair.f().slope(v)));
    s = std::fmax(s, std::fabs(pair.g().slope(v)));
  }
  return M + s * T + 1.0;
}

int cmd_forward(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.u0) throw dfc::schema_error("forward: scenario needs 'u0'");
  const double H = support_halfwidth(*sc.u0, sc.pair, sc.T);
  std::ofstream csv(fs::path(cli.out_dir) / "snapshots.csv");
  csv << "t,x,u,side\n";
  dfc::GridSolution g = dfc::make_grid(*sc.u0, -H, H, sc.knobs.dx);
  write_grid_csv(g, csv);
  json masses = json::array();
  for (int q = 1; q <= 4; ++q) {
    dfc::godunov_run(sc.pair, g, sc.T * q / 4.0, sc.knobs.cfl);
    write_grid_csv(g, csv);
    masses.push_back(g.mass());
  }
  json rep;
  rep["final_mass"] = g.mass();
  rep["masses"] = masses;
  rep["cells"] = g.u.size();
  write_report(cli, "forward", rep, true);
  return 0;
}

int cmd_value(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.u0) throw dfc::schema_error("value: scenario needs 'u0'");
  if (sc.probes.empty()) throw dfc::schema_error("value: scenario needs 'probes'");
  dfc::Primitive v0(*sc.u0);
  std::ofstream csv(fs::path(cli.out_dir) / "values.csv");
  csv << "x,t,v,class\n";
  json rows = json::array();
  for (auto [x, t] : sc.probes) {
    const dfc::ValueSample s = dfc::value_function(sc.pair, v0, x, t);
    const char* cls = s.curve.cls == dfc::ControlCurve::Class::c0   ? "c0"
                      : s.curve.cls == dfc::ControlCurve::Class::cb ? "cb"
                                                                    : "cr";
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s\n", x, t, s.v, cls);
    csv << buf;
    rows.push_back({{"x", x}, {"t", t}, {"v", s.v}, {"class", cls}});
  }
  json rep;
  rep["samples"] = rows;
  write_report(cli, "value", rep, true);
  return 0;
}

int cmd_check_reachable(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.target) throw dfc::schema_error("check-reachable: scenario needs 'target'");
  const dfc::ReachVerdict v = dfc::is_reachable(sc.pair, *sc.target);
  json rep;
  rep["member"] = v.member;
  rep["reason"] = v.reason;
  rep["condition"] = v.condition;
  if (v.fixed_point) {
    rep["xi0"] = v.fixed_point->xi0;
    rep["tau0"] = v.fixed_point->tau0;
    std::ofstream csv(fs::path(cli.out_dir) / "s_curve.csv");
    csv << "t,x\n";
    char buf[80];
    for (std::size_t i = 0; i < v.fixed_point->s.ts.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", v.fixed_point->s.ts[i],
                    v.fixed_point->s.xs[i]);
      csv << buf;
    }
  }
  write_report(cli, "check-reachable", rep, v.member);
  std::cout << (v.member ? "member" : "rejected: " + v.reason) << "\n";
  return v.member ? 0 : 1;
}

int cmd_backward(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.target) throw dfc::schema_error("backward: scenario needs 'target'");
  dfc::BlockSolution sol = dfc::realize_target(sc.pair, *sc.target);
  {
    std::ofstream j(fs::path(cli.out_dir) / "u0.json");
    j << dfc::to_json(sol.u0).dump(2) << "\n";
  }
  {
    std::ofstream j(fs::path(cli.out_dir) / "fan.json");
    j << dfc::to_json(sol.fan).dump(2) << "\n";
  }
  const double H = support_halfwidth(sol.u0, sc.pair, sc.T);
  write_fan_samples(sol.fan, fs::path(cli.out_dir) / "samples.csv", -H, H, 2000,
                    {0.0, sc.T / 4, sc.T / 2, 3 * sc.T / 4, sc.T});
  json rep;
  rep["residuals"] = fan_residuals(sol.fan);
  rep["u0_pieces"] = sol.u0.values.size();
  const bool pass = rep["residuals"]["rh_residual_max"].get<double>() < 1e-8 &&
                    rep["residuals"]["entropy_violations"].get<int>() == 0;
  write_report(cli, "backward", rep, pass);
  return pass ? 0 : 1;
}

int cmd_exact_control(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.target || !sc.outer_data)
    throw dfc::schema_error("exact-control: scenario needs 'target', 'outer_data', 'B', 'C'");
  dfc::ExactControlKnobs k;
  k.dx = sc.knobs.dx;
  dfc::ExactControlResult r =
      dfc::exact_control(sc.pair, *sc.target, sc.B1, sc.B2, sc.C1, sc.C2, *sc.outer_data, k);
  {
    std::ofstream j(fs::path(cli.out_dir) / "u0.json");
    j << dfc::to_json(r.u0).dump(2) << "\n";
  }
  const double H = support_halfwidth(r.u0, sc.pair, sc.T);
  write_fan_samples(r.inner_fan, fs::path(cli.out_dir) / "inner_samples.csv", -H, H, 2000,
                    {0.0, sc.T / 4, sc.T / 2, 3 * sc.T / 4, sc.T});
  // match residual on (C1, R2) u (R1, C2) via a forward solve
  dfc::GridSolution g = dfc::godunov_solve(sc.pair, r.u0, sc.T, sc.knobs.dx, -H, H);
  auto ref = [&](double x) { return r.inner_fan.eval(x, sc.T * (1 - 1e-12)); };
  const double l1 = dfc::l1_distance_to(g, ref, sc.C1, sc.target->R2) +
                    dfc::l1_distance_to(g, ref, sc.target->R1, sc.C2);
  json rep;
  rep["lambda1"] = r.lambda1;
  rep["lambda2"] = r.lambda2;
  rep["buffers_used"] = r.buffers_used;
  rep["match_l1"] = l1;
  rep["residuals"] = fan_residuals(r.inner_fan);
  const bool pass = l1 < sc.knobs.tol;
  write_report(cli, "exact-control", rep, pass);
  return pass ? 0 : 1;
}

int cmd_optimal(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.target_k) throw dfc::schema_error("optimal-control: scenario needs 'target_k'");
  dfc::MinimizeKnobs k;
  k.n_knots = sc.knobs.knots;
  k.starts = sc.knobs.starts;
  k.sweeps = sc.knobs.sweeps;
  k.dx = sc.knobs.dx;
  k.seed = sc.knobs.seed;
  k.threads = sc.knobs.threads;
  dfc::MinimizeResult r = dfc::minimize(sc.pair, *sc.target_k, sc.T, k);
  {
    std::ofstream j(fs::path(cli.out_dir) / "u0_opt.json");
    j << dfc::to_json(r.u0).dump(2) << "\n";
  }
  {
    std::ofstream csv(fs::path(cli.out_dir) / "trace.csv");
    csv << "step,J,term_left,term_crossed,term_plateau,term_right\n";
    char buf[200];
    for (const auto& row : r.trace) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.step, row.J,
                    row.term[0], row.term[1], row.term[2], row.term[3]);
      csv << buf;
    }
  }
  dfc::BlockSolution sol = dfc::realize_target(sc.pair, r.alpha);
  const double H = support_halfwidth(sol.u0, sc.pair, sc.T);
  write_fan_samples(sol.fan, fs::path(cli.out_dir) / "final_fan.csv", -H, H, 2000,
                    {0.0, sc.T / 4, sc.T / 2, 3 * sc.T / 4, sc.T});
  json rep;
  rep["J"] = r.J_grid;
  rep["J_reduced"] = r.J_reduced.total;
  rep["baseline_J"] = r.baseline_J;
  rep["M1"] = r.M1;
  rep["M2"] = r.M2;
  rep["M3"] = r.M3;
  rep["improved"] = r.improved;
  rep["diagnostic"] = r.diagnostic;
  rep["alpha"] = dfc::to_json(r.alpha);
  const bool pass = r.J_grid <= r.M1 + 1e-6;
  write_report(cli, "optimal-control", rep, pass);
  return pass ? 0 : 1;
}

int cmd_verify_roundtrip(const Cli& cli, dfc::Scenario& sc) {
  if (!sc.target) throw dfc::schema_error("verify-roundtrip: scenario needs 'target'");
  dfc::BlockSolution sol = dfc::realize_target(sc.pair, *sc.target);
  const double H = support_halfwidth(sol.u0, sc.pair, sc.T);
  dfc::GridSolution g = dfc::godunov_solve(sc.pair, sol.u0, sc.T, sc.knobs.dx, -H, H);
  const double l1 = dfc::l1_distance_to(
      g, [&](double x) { return sol.fan.eval(x, sc.T * (1 - 1e-12)); }, -H + 1.0, H - 1.0);
  json rep;
  rep["residuals"] = fan_residuals(sol.fan);
  rep["roundtrip_l1"] = l1;
  rep["tolerance"] = sc.knobs.tol;
  const bool pass = l1 < sc.knobs.tol &&
                    rep["residuals"]["rh_residual_max"].get<double>() < 1e-8 &&
                    rep["residuals"]["entropy_violations"].get<int>() == 0;
  write_report(cli, "verify-roundtrip", rep, pass);
  std::cout << "roundtrip L1 = " << l1 << (pass ? " (pass)" : " (FAIL)") << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backward construction, reachability and control for conservation laws "
               "with a convex-convex flux discontinuity at x = 0"};
  app.require_subcommand(1);
  Cli cli;
  std::string command;
  for (const char* name : {"forward", "value", "check-reachable", "backward", "exact-control",
                           "optimal-control", "verify-roundtrip"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--scenario", cli.scenario, "scenario JSON file")->required();
    sub->add_option("--out", cli.out_dir, "output directory");
    sub->add_option("--seed", cli.seed, "override scenario seed");
    sub->add_option("--dx", cli.dx, "override scenario dx");
    sub->add_option("--threads", cli.threads, "worker threads");
    sub->callback([&command, name]() { command = name; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (const char* env = std::getenv("DFC_OUT_DIR"); env && cli.out_dir == "out")
      cli.out_dir = env;
    fs::create_directories(cli.out_dir);
    dfc::Scenario sc = dfc::load_scenario(cli.scenario);
    if (cli.seed) sc.knobs.seed = cli.seed;
    if (cli.dx > 0.0) sc.knobs.dx = cli.dx;
    if (cli.threads) sc.knobs.threads = cli.threads;
    if (command == "forward") return cmd_forward(cli, sc);
    if (command == "value") return cmd_value(cli, sc);
    if (command == "check-reachable") return cmd_check_reachable(cli, sc);
    if (command == "backward") return cmd_backward(cli, sc);
    if (command == "exact-control") return cmd_exact_control(cli, sc);
    if (command == "optimal-control") return cmd_optimal(cli, sc);
    if (command == "verify-roundtrip") return cmd_verify_roundtrip(cli, sc);
    return 2;
  } catch (const dfc::schema_error& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const dfc::infeasible_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const dfc::saturation_error& e) {
    std::cerr << "saturation: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
