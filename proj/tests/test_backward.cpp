#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dfc/backward.hpp"
#include "dfc/extract.hpp"
#include "dfc/godunov.hpp"
#include "oracles.hpp"

using namespace dfc;
using Catch::Approx;

TEST_CASE("shock block: rho2 = 0 corner case") {
  auto pair = burgers_shifted();
  const double T = 2.0;
  const double x0 = pair.i_plus_min() * T;  // 2*sqrt(2): T - x0/f'(theta_bar) = 0
  BlockSolution sol = build_shock_block(pair, x0, -2.0, 0.0, T);
  // t2 = 0, a2 on the theta_bar branch, b2 = theta_g
  // the square-root branch near the flux minimum amplifies 1e-16 to ~1e-8
  CHECK(sol.fan.eval(x0 * 0.9, 1e-6) == Approx(pair.theta_bar_g()).margin(1e-7));
  CHECK(sol.u0.values.back() == Approx(pair.theta_bar_g()).margin(1e-7));
  CHECK(sol.u0.values[1] == Approx(pair.theta_g()).margin(1e-7));
}

TEST_CASE("shock block: frozen full instance and forward agreement") {
  auto pair = burgers_shifted();
  BlockSolution sol = build_shock_block(pair, 2.5, -2.0, -0.5, 2.0);
  // frozen from the dense-scan t_plus oracle:
  //   t1=0.987759198157 t2=0.529682407295 a1=2.469768058596 a2=1.700312920422
  //   b1=2.024784991860 b2=0.943961878125 t3=0.800982516849 rho3=-1.188957169904
  CHECK(sol.u0.breakpoints[0] == Approx(-1.188957169904).margin(1e-7));
  CHECK(sol.u0.values[0] == Approx(2.024784991860).margin(1e-8));
  CHECK(sol.u0.values[1] == Approx(0.943961878125).margin(1e-8));
  CHECK(sol.u0.values[2] == Approx(1.700312920422).margin(1e-8));
  CHECK(sol.fan.eval(0.1, 1.9) == Approx(2.469768058596).margin(1e-8));
  // g(b_i) = f(a_i) within 1e-9
  CHECK(std::fabs(pair.g().value(2.024784991860) - pair.f().value(2.469768058596)) < 1e-8);
  CHECK(std::fabs(pair.g().value(sol.u0.values[0]) -
                  pair.f().value(sol.fan.eval(0.1, 1.9))) < 1e-9);
  const double rho3 = sol.u0.breakpoints[0];
  CHECK((rho3 > -2.0 && rho3 < -0.5));
  // Godunov forward: L1 error < 2e-2 at dx = 5e-4
  GridSolution g = godunov_solve(pair, sol.u0, 2.0, 5e-4, -9.0, 9.0);
  const double l1 = l1_distance_to(
      g, [&](double x) { return sol.fan.eval(x, 2.0 * (1 - 1e-12)); }, -7.0, 7.0);
  CHECK(l1 < 2e-2);
}

TEST_CASE("shock block rejects bad hypotheses") {
  auto pair = burgers_shifted();
  CHECK_THROWS_AS(build_shock_block(pair, 2.5, -0.5, -2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(build_shock_block(pair, 4.0, -2.0, 0.0, 2.0), infeasible_error);
}

TEST_CASE("continuous block: degenerate x1 = x2 and probe values") {
  auto pair = burgers_shifted();
  {
    BlockSolution sol = build_continuous_block(pair, 1.0, 1.0, -2.0, 2.0);
    // graded region is empty: value just right of gamma1 equals a2 = a1
    const double t1 = pair.solve_t_plus(1.0, -2.0, 2.0);
    const double a = pair.f().inv_slope(1.0 / (2.0 - t1));
    CHECK(sol.fan.eval(0.5, 1.99) == Approx(a).margin(1e-8));
  }
  BlockSolution sol = build_continuous_block(pair, 0.5, 1.5, -3.0, 2.0);
  oracle::BurgersShift bs{1.0};
  const double t1 = bs.t_plus(0.5, -3.0, 2.0), t2 = bs.t_plus(1.5, -3.0, 2.0);
  CHECK(t2 < t1);
  // b1 region probe: g'(b1) = -rho0/t1 and g' = id for the shifted pair
  CHECK(sol.fan.eval(-2.9, 0.5) == Approx(3.0 / t1).margin(1e-7));
  // t_plus strict decrease across [x1, x2] at t = T
  double prev = 1e9;
  for (int i = 0; i <= 20; ++i) {
    const double x = 0.5 + (1.5 - 0.5) * i / 20.0;
    const double tp = sol.fan.t_plus_at_T(x);
    CHECK(tp < prev);
    prev = tp;
  }
  // Godunov agreement
  GridSolution g = godunov_solve(pair, sol.u0, 2.0, 1e-3, -9.0, 9.0);
  CHECK(l1_distance_to(g, [&](double x) { return sol.fan.eval(x, 2.0 * (1 - 1e-12)); }, -7.0,
                       7.0) < 2e-2);
}

TEST_CASE("reflected case 3: data layout of the display") {
  auto pair = burgers_shifted();
  const double T = 2.0;
  const double xi0 = -pair.f().slope(pair.theta_dbar_g()) * T;  // sqrt(2) T
  TargetElement e;
  e.T = T;
  e.R1 = e.R2 = 0.0;
  e.xlo = -1e-9;
  e.xhi = xi0 + 1.0;
  e.y_inner = MonotoneProfile({0.0}, {0.0, xi0});  // y_- = 0, y_+ = xi0
  auto [u0, fan, split] = build_reflected_block(pair, e);
  CHECK(split.case_id == 3);
  // u+ with f'(u+) = -y_+/T = -sqrt(2): u+ = -sqrt(2) = theta_dbar: data collapses
  CHECK(split.u_plus == Approx(pair.theta_dbar_g()).margin(1e-9));
  CHECK(u0(xi0 * 0.5) == Approx(pair.theta_dbar_g()).margin(1e-9));
  CHECK(u0(xi0 + 0.5) == Approx(pair.theta_dbar_g()).margin(1e-9));
  // smaller y_+ than xi0 is not reachable
  e.y_inner.values[1] = xi0 * 0.9;
  CHECK_THROWS_AS(build_reflected_block(pair, e), infeasible_error);
}

TEST_CASE("reflected case 2 subcase 1: three-constant datum") {
  auto pair = burgers_shifted();
  const double T = 2.0;
  const double R1 = pair.i_plus_min() * T + 0.8;  // T(R1) < 0 -> case 2
  TargetElement e;
  e.T = T;
  e.R1 = e.R2 = R1;
  // choose y_+ small so gamma_1(0) < gamma_2(0): u+ > theta_bar
  const double y_plus = 0.1;
  const double y_minus = -1.5;
  e.xlo = y_minus;
  e.xhi = R1 + y_plus + 2.0;
  e.y_inner = MonotoneProfile({R1}, {y_minus, y_plus});
  auto [u0, fan, split] = build_reflected_block(pair, e);
  CHECK(split.case_id == 2);
  const double g2_0 = R1 - pair.i_plus_min() * T;
  REQUIRE(y_plus < g2_0);  // subcase 1/2 branch
  const double t0 = pair.solve_t_plus(R1, y_minus, T);
  const double wbar = pair.f().inv_slope(R1 / (T - t0));
  const double u_plus = pair.f().inv_slope((R1 - y_plus) / T);
  CHECK(split.wbar_minus == Approx(wbar).margin(1e-10));
  CHECK(wbar >= u_plus);
  if (split.subcase == 1) {
    // datum: w- | wbar- | u+ split at gamma3(0) >= 0
    CHECK(u0(-0.5) == Approx(split.w_minus).margin(1e-10));
    const double g3_0 = R1 - pair.chord_f(u_plus, wbar) * T;
    CHECK(u0(g3_0 * 0.5) == Approx(wbar).margin(1e-10));
    CHECK(u0(g3_0 + 0.1) == Approx(u_plus).margin(1e-10));
  }
  // forward check
  GridSolution g = godunov_solve(pair, u0, T, 1e-3, -12.0, 12.0);
  CHECK(l1_distance_to(g, [&](double x) { return fan.eval(x, T * (1 - 1e-12)); }, -10.0, 10.0) <
        3e-2);
}

TEST_CASE("reflected case 1: full instance with forward agreement") {
  auto pair = burgers_shifted();
  TargetElement e;
  e.T = 2.0;
  e.R1 = 1.0;
  e.R2 = 0.5;
  const double xi0 = find_fixed_point(pair, 1.0, 2.0).xi0;
  const double y_plus = xi0 + 0.3;
  e.xlo = -1.0;
  e.xhi = 2.5;
  e.y_inner = MonotoneProfile({1.0}, {-1.0, y_plus});
  auto [u0, fan, split] = build_reflected_block(pair, e);
  CHECK(split.case_id == 1);
  REQUIRE(split.fixed_point.has_value());
  // datum per the display: w- | theta_g | theta_dbar | beta0 | u+
  CHECK(u0(-0.2) == Approx(pair.theta_g()).margin(1e-10));
  CHECK(u0(xi0 * 0.5) == Approx(pair.theta_dbar_g()).margin(1e-10));
  CHECK(u0(e.y(-5.0, Side::left)) == Approx(split.w_minus).margin(1e-10));
  const double beta0 = pair.f().inv_slope((1.0 - xi0) / 2.0);
  const double xi1 = 1.0 - pair.chord_f(split.u_plus, beta0) * 2.0;
  CHECK(u0(0.5 * (xi0 + xi1)) == Approx(beta0).margin(1e-9));
  CHECK(u0(xi1 + 0.05) == Approx(split.u_plus).margin(1e-9));
  // interface entropy and RH hold along the fan
  for (int i = 1; i < 40; ++i) {
    const double t = 2.0 * i / 40.0;
    CHECK(fan.rh_residual(t) < 1e-8);
    CHECK(fan.entropy_ok(t));
  }
  GridSolution g = godunov_solve(pair, u0, 2.0, 1e-3, -10.0, 10.0);
  CHECK(l1_distance_to(g, [&](double x) { return fan.eval(x, 2.0 * (1 - 1e-12)); }, -8.0, 8.0) <
        3e-2);
}

TEST_CASE("D2 block: constant feet collapse to the continuous-block form") {
  auto pair = burgers_shifted();
  MonotoneProfile y = MonotoneProfile::constant(-1.5);
  BlockSolution d2 = build_D2_block(pair, 1.0, y, 2.0, 64);
  BlockSolution cont = build_continuous_block(pair, 0.0, 1.0, -1.5, 2.0);
  for (double x : {-3.0, -1.0, 0.3, 0.7, 2.0})
    CHECK(d2.fan.eval(x, 1.999) == Approx(cont.fan.eval(x, 1.999)).margin(1e-8));
}

TEST_CASE("D2 block: two-step ladder against the t_plus oracle") {
  auto pair = burgers_shifted();
  MonotoneProfile y({0.5}, {-2.0, -1.0});
  BlockSolution d2 = build_D2_block(pair, 1.0, y, 2.0, 0);  // exact ladder
  // frozen ladder values (dense-scan oracle):
  //   tau- = 1.726491350113, tau+ = 1.674301603414 at chi = 0.5,
  //   t1 = 1.371506974000, shock crossing delta = 1.702669288537,
  //   g-side shock foot beta0 = -1.494673536197 in (-2, -1)
  const double tm = 1.726491350113, tp = 1.674301603414, delta = 1.702669288537;
  CHECK(pair.solve_t_plus(0.5, -2.0, 2.0) == Approx(tm).margin(1e-8));
  CHECK(pair.solve_t_plus(0.5, -1.0, 2.0) == Approx(tp).margin(1e-8));
  CHECK(tp < tm);
  // the data has the beta shock foot between the feet
  bool found = false;
  for (double b : d2.u0.breakpoints)
    if (b > -2.0 + 1e-9 && b < -1.0 - 1e-9) {
      found = true;
      CHECK(b == Approx(-1.494673536197).margin(1e-8));
    }
  CHECK(found);
  // taus strictly decreasing is asserted inside the builder; re-check times
  CHECK(delta > tp);
  CHECK(delta < tm);
  // refinement N = 64 splits the jump into 1/64-substeps at the same position:
  // every sub-shock foot stays inside its own z-subinterval
  BlockSolution fine = build_D2_block(pair, 1.0, y, 2.0, 64);
  std::vector<double> feet;
  for (double b : fine.u0.breakpoints)
    if (b > -2.0 + 1e-12 && b < -1.0 - 1e-12) feet.push_back(b);
  CHECK(feet.size() == 64);
  for (std::size_t i = 0; i < feet.size(); ++i) {
    CHECK(feet[i] > -2.0 + i / 64.0 - 1e-9);
    CHECK(feet[i] < -2.0 + (i + 1) / 64.0 + 1e-9);
  }
  // the terminal profile is independent of the refinement
  for (double x : {0.2, 0.45, 0.55, 0.8})
    CHECK(fine.fan.eval(x, 2.0 * (1 - 1e-12)) ==
          Approx(d2.fan.eval(x, 2.0 * (1 - 1e-12))).margin(1e-9));
  // terminal values: graded feet -2 below x=0.5, -1 above
  const double tq = 2.0 * (1 - 1e-12);
  const double u_left = d2.fan.eval(0.45, tq);
  const double u_right = d2.fan.eval(0.55, tq);
  CHECK(u_left > u_right);  // shock down at the jump
  CHECK(std::fabs(-2.0 / pair.solve_t_plus(0.45, -2.0, 2.0) +
                  pair.h_plus(pair.f().slope(u_left))) < 1e-7);
}

TEST_CASE("D2 block: refinement convergence in N") {
  auto pair = burgers_shifted();
  // strictly increasing continuous feet profile, finely sampled
  const double R2 = 1.0, T = 2.0;
  MonotoneProfile ramp;
  const int fine = 512;
  ramp.values.push_back(-2.0);
  for (int i = 1; i < fine; ++i)
    ramp.push_piece(R2 * i / fine, -2.0 + 1.2 * i / fine);
  BlockSolution a = build_D2_block(pair, R2, ramp, T, 64);
  BlockSolution b = build_D2_block(pair, R2, ramp, T, 256);
  const double tq = T * (1 - 1e-12);
  double l1 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const double x = -4.0 + 8.0 * (i + 0.5) / n;
    l1 += std::fabs(a.fan.eval(x, tq) - b.fan.eval(x, tq));
  }
  l1 *= 8.0 / n;
  CHECK(l1 > 0.0);
  CHECK(l1 < 8.0 / 64.0);  // < C/64 with C fitted here as the window width
}

TEST_CASE("matched two-state data across the interface is stationary") {
  auto pair = burgers_shifted();
  // (q0 | p0) with f(p0) = g(q0), p0 >= theta_bar: a constant-in-time solution
  const double p0 = std::sqrt(3.0);
  const double q0 = pair.g().branch_inverse(pair.f().value(p0), Branch::plus);
  CHECK(std::fabs(pair.f().value(p0) - pair.g().value(q0)) < 1e-12);
  CHECK(-(-q0 * 2.0) / 2.0 == Approx(pair.h_plus(p0)).margin(1e-10));  // -rho(0)/T = h_+(f'(p0))
  StepFunction u0;
  u0.breakpoints = {0.0};
  u0.values = {q0, p0};
  GridSolution g = godunov_solve(pair, u0, 1.0, 2e-3, -4.0, 4.0);
  CHECK(l1_distance_to(g, [&](double x) { return u0(x); }, -2.0, 2.0) < 1e-3);
}

TEST_CASE("realize: identity target for the equality pair") {
  FluxPair eq(ConvexFlux::quadratic(0.5, 0.0, 0.0), ConvexFlux::quadratic(0.5, 1.0, 0.0));
  TargetElement e;
  e.T = 2.0;
  e.R1 = e.R2 = 0.0;
  e.xlo = e.xhi = 0.0;
  e.y_inner = MonotoneProfile::constant(0.0);
  BlockSolution sol = realize_target(eq, e);
  // stationary (theta_g | theta_f) data, fan constant in each half plane
  CHECK(sol.u0(-1.0) == Approx(eq.theta_g()).margin(1e-10));
  CHECK(sol.u0(1.0) == Approx(eq.theta_f()).margin(1e-10));
  for (double t : {0.3, 1.1, 1.9}) {
    CHECK(sol.fan.eval(-2.0, t) == Approx(eq.theta_g()).margin(1e-12));
    CHECK(sol.fan.eval(2.0, t) == Approx(eq.theta_f()).margin(1e-12));
  }
}

TEST_CASE("realize: randomized member round trip at moderate resolution") {
  auto pair = burgers_shifted();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double T = 2.0;
  TargetElement e;
  e.T = T;
  e.R1 = 1.4;
  e.R2 = 0.7;
  e.xlo = -2.2;
  const double xi0 = find_fixed_point(pair, e.R1, T).xi0;
  // 6-piece y: three left feet, identity windows, two right values
  MonotoneProfile y;
  y.values = {-2.0};
  y.push_piece(-1.2, -1.3);
  y.push_piece(0.3, -0.6);
  y.push_piece(e.R1, xi0 + 0.2);
  y.push_piece(2.1, xi0 + 0.9);
  e.xhi = 3.4;
  e.y_inner = y;
  REQUIRE(is_reachable(pair, e).member);
  BlockSolution sol = realize_target(pair, e);
  // terminal y read from the fan matches the target off [R2, R1]
  for (double x : {-3.0, -1.9, -0.8, 1.6, 2.5, 3.0}) {
    const double want = e.y(x, Side::right);
    CHECK(sol.fan.y_at_T(x) == Approx(want).margin(1e-7));
  }
  GridSolution g = godunov_solve(pair, sol.u0, T, 1e-3, -12.0, 12.0);
  CHECK(l1_distance_to(g, [&](double x) { return sol.fan.eval(x, T * (1 - 1e-12)); }, -10.0,
                       10.0) < 4e-2);
  (void)rng;
  (void)U;
}

TEST_CASE("exact control: outer data equal to the realized extension") {
  auto pair = burgers_shifted();
  TargetElement e;
  e.T = 2.0;
  e.R1 = 1.0;
  e.R2 = 0.5;
  e.xlo = -1.0;
  e.xhi = 2.0;
  e.y_inner = MonotoneProfile({1.0}, {-1.0, 0.6});
  // realize the tilde data first, then feed it back as outer data
  ExactControlResult probe = exact_control(pair, e, -4.0, 4.0, -3.0, 3.0,
                                           StepFunction::constant(pair.theta_g()),
                                           ExactControlKnobs{4e-3, 0.45, 5e-2, 8});
  ExactControlResult again =
      exact_control(pair, e, -4.0, 4.0, -3.0, 3.0, probe.u0, ExactControlKnobs{4e-3});
  CHECK_FALSE(again.buffers_used);
}

TEST_CASE("exact control: zero outer data, buffers found by doubling") {
  auto pair = burgers_shifted();
  TargetElement e;
  e.T = 2.0;
  e.R1 = 1.0;
  e.R2 = 0.5;
  e.xlo = -1.0;
  e.xhi = 2.0;
  e.y_inner = MonotoneProfile({1.0}, {-1.0, 0.6});
  StepFunction outer;
  outer.breakpoints = {-4.5, 4.6};
  outer.values = {0.3, 0.9, -0.4};
  ExactControlResult r =
      exact_control(pair, e, -4.0, 4.0, -3.0, 3.0, outer, ExactControlKnobs{4e-3, 0.45, 2e-2, 16});
  CHECK(r.buffers_used);
  CHECK(r.lambda1 < 0.0);
  CHECK(r.lambda2 > 0.0);
  // data equals outer off (B1, B2)
  CHECK(r.u0(-5.5) == 0.3);
  CHECK(r.u0(-4.2) == 0.9);
  CHECK(r.u0(5.5) == -0.4);
  // inner fan traces on gamma1/gamma2 equal the tilde states exactly
  for (double t : {0.4, 1.0, 1.7}) {
    CHECK(r.inner_fan.eval(r.gamma1.x_at(t) + 1e-9, t) ==
          Approx(r.u_tilde_minus).margin(1e-6));
    CHECK(r.inner_fan.eval(r.gamma2.x_at(t) - 1e-9, t) ==
          Approx(r.u_tilde_plus).margin(1e-6));
  }
  // match on (C1, R2) u (R1, C2) against a forward solve
  GridSolution g = godunov_solve(pair, r.u0, 2.0, 2e-3, -26.0, 26.0);
  auto ref = [&](double x) { return r.inner_fan.eval(x, 2.0 * (1 - 1e-12)); };
  const double l1 = l1_distance_to(g, ref, -3.0, 0.5) + l1_distance_to(g, ref, 1.0, 3.0);
  CHECK(l1 < 5e-2);
}

TEST_CASE("reflected case 2 subcases 2 and 4: crossing-back shocks") {
  auto pair = burgers_shifted();
  const double T = 2.0;
  const double R1 = pair.i_plus_min() * T + 0.08;  // T(R1) < 0
  // subcase 2: u+ > theta_bar and the wbar/u+ shock starts left of x = 0
  {
    TargetElement e;
    e.T = T;
    e.R1 = e.R2 = R1;
    e.xlo = -1.2;
    e.xhi = R1 + 0.4;
    e.y_inner = MonotoneProfile({R1}, {-1.0, 0.02});
    auto [u0, fan, split] = build_reflected_block(pair, e);
    CHECK(split.case_id == 2);
    CHECK(split.subcase == 2);
    // datum per the display: w- | ubar+ | u+ with the middle g-state matched
    const double ubar_plus = pair.g().branch_inverse(pair.f().value(split.u_plus), Branch::plus);
    CHECK(u0(-0.05) == Approx(ubar_plus).margin(1e-9));
    CHECK(u0(0.05) == Approx(split.u_plus).margin(1e-9));
    for (int i = 1; i < 30; ++i) {
      CHECK(fan.rh_residual(T * i / 30.0) < 1e-8);
      CHECK(fan.entropy_ok(T * i / 30.0));
    }
    GridSolution g = godunov_solve(pair, u0, T, 2e-3, -12.0, 12.0);
    CHECK(l1_distance_to(g, [&](double x) { return fan.eval(x, T * (1 - 1e-12)); }, -10.0,
                         10.0) < 4e-2);
  }
  // subcase 4: u+ <= theta_bar and the wbar/theta_bar shock starts left of 0
  {
    TargetElement e;
    e.T = T;
    e.R1 = e.R2 = R1;
    e.xlo = -1.2;
    e.xhi = R1 + 1.0;
    e.y_inner = MonotoneProfile({R1}, {-1.0, 0.8});
    auto [u0, fan, split] = build_reflected_block(pair, e);
    CHECK(split.case_id == 2);
    CHECK(split.subcase == 4);
    // datum: w- | theta_g | theta_bar | u+
    CHECK(u0(-0.05) == Approx(pair.theta_g()).margin(1e-9));
    CHECK(u0(0.05) == Approx(pair.theta_bar_g()).margin(1e-9));
    for (int i = 1; i < 30; ++i) {
      CHECK(fan.rh_residual(T * i / 30.0) < 1e-8);
      CHECK(fan.entropy_ok(T * i / 30.0));
    }
    GridSolution g = godunov_solve(pair, u0, T, 2e-3, -12.0, 12.0);
    CHECK(l1_distance_to(g, [&](double x) { return fan.eval(x, T * (1 - 1e-12)); }, -10.0,
                         10.0) < 4e-2);
  }
}

TEST_CASE("terminal backtrace of a realized fan is non-decreasing") {
  auto pair = burgers_shifted();
  TargetElement e;
  e.T = 2.0;
  e.R1 = 1.2;
  e.R2 = 0.6;
  const double xi0 = find_fixed_point(pair, e.R1, e.T).xi0;
  e.xlo = -1.8;
  e.xhi = 2.8;
  e.y_inner = MonotoneProfile({-0.6, e.R1, 2.0}, {-1.8, -0.9, xi0 + 0.25, xi0 + 0.8});
  BlockSolution sol = realize_target(pair, e);
  double prev = -1e300;
  for (int i = 0; i < 300; ++i) {
    const double x = -3.0 + 7.0 * (i + 0.5) / 300;
    if (x > -1e-3 && x < e.R1 + 1e-3) continue;  // y undefined on [0-, R1]
    double y;
    if (x > 0.0 && x < e.R2) {
      const double tp = sol.fan.t_plus_at_T(x);
      y = -tp * pair.h_plus(x / (e.T - tp));  // crossed feet via the transfer map
    } else {
      y = sol.fan.y_at_T(x);
    }
    if (x > 0.0 && x > e.R2 && x < e.R1) continue;
    CHECK(y >= prev - 1e-7);
    prev = y;
  }
}

TEST_CASE("realize and forward-check with a non-quadratic flux pair") {
  // quartic fluxes exercise the generic bisection paths end to end
  auto f = ConvexFlux::polynomial({0.0, 0.0, 0.5, 0.0, 0.25}, 6.0);  // u^2/2 + u^4/4
  auto g = ConvexFlux::polynomial({0.8, 0.0, 0.5, 0.0, 0.25}, 6.0);
  f.validate();
  g.validate();
  FluxPair pair(std::move(f), std::move(g));
  const double T = 1.5;
  TargetElement e;
  e.T = T;
  e.R1 = 0.7;
  e.R2 = 0.35;
  const double xi0 = find_fixed_point(pair, e.R1, T).xi0;
  e.xlo = -0.9;
  e.xhi = 1.6;
  e.y_inner = MonotoneProfile({-0.3, e.R1}, {-0.9, -0.5, xi0 + 0.2});
  REQUIRE(is_reachable(pair, e).member);
  BlockSolution sol = realize_target(pair, e);
  for (int i = 1; i < 25; ++i) {
    CHECK(sol.fan.rh_residual(T * i / 25.0) < 1e-8);
    CHECK(sol.fan.entropy_ok(T * i / 25.0));
  }
  GridSolution grid = godunov_solve(pair, sol.u0, T, 4e-3, e.xlo - 0.4, e.xhi + 0.4);
  const double l1 = l1_distance_to(
      grid, [&](double x) { return sol.fan.eval(x, T * (1 - 1e-12)); }, e.xlo - 0.2,
      e.xhi + 0.2);
  CHECK(l1 < 4e-2);
}

TEST_CASE("realize a member with zero feet on (0, R2)") {
  auto pair = burgers_shifted();
  const double T = 2.0;
  TargetElement e;
  e.T = T;
  e.R1 = 1.2;
  e.R2 = 0.8;  // < f'(theta_bar) T, so zero feet are admissible
  const double xi0 = find_fixed_point(pair, e.R1, T).xi0;
  e.xlo = 0.0;
  e.xhi = 1.8;
  e.y_inner = MonotoneProfile({e.R1}, {0.0, xi0 + 0.25});
  REQUIRE(is_reachable(pair, e).member);
  BlockSolution sol = realize_target(pair, e);
  // feet 0 make the crossed region the theta_bar plateau
  CHECK(sol.fan.eval(0.4, T * (1 - 1e-12)) == Approx(pair.theta_bar_g()).margin(1e-9));
  GridSolution g = godunov_solve(pair, sol.u0, T, 2e-3, -0.6, 2.2);
  CHECK(l1_distance_to(g, [&](double x) { return sol.fan.eval(x, T * (1 - 1e-12)); }, -0.4,
                       2.0) < 3e-2);
}

TEST_CASE("exact control freezes the overhanging profile beyond C1") {
  auto pair = burgers_shifted();
  TargetElement e;
  e.T = 2.0;
  e.R1 = 1.0;
  e.R2 = 0.5;
  e.xlo = -5.0;
  e.xhi = 2.0;
  e.y_inner = MonotoneProfile({-2.0, 1.0}, {-4.6, -1.0, 0.6});
  REQUIRE(is_reachable(pair, e).member);
  const double C1 = -3.0, C2 = 3.0, B1 = -5.5, B2 = 4.0;
  StepFunction outer = StepFunction::constant(0.5);
  ExactControlResult r =
      exact_control(pair, e, B1, B2, C1, C2, outer, ExactControlKnobs{6e-3, 0.45, 3e-2, 10});
  // the tilde element freezes y(C1+) on the left overhang
  CHECK(r.tilde_elem.xlo == Approx(-4.6));
  CHECK(r.tilde_elem.y(-3.5, Side::right) == Approx(-4.6));
  CHECK(r.tilde_elem.y(-1.0, Side::right) == Approx(-1.0));
  // matching on (C1, R2) u (R1, C2) via a forward solve of the glued data
  GridSolution g = godunov_solve(pair, r.u0, e.T, 3e-3, B1 - 21.0, B2 + 21.0);
  auto ref = [&](double x) { return r.inner_fan.eval(x, e.T * (1 - 1e-12)); };
  CHECK(l1_distance_to(g, ref, C1, e.R2) + l1_distance_to(g, ref, e.R1, C2) < 5e-2);
}
