#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dfc/backward.hpp"
#include "dfc/extract.hpp"
#include "dfc/flux.hpp"
#include "dfc/godunov.hpp"
#include "dfc/profile.hpp"
#include "dfc/quadrature.hpp"
#include "dfc/reachable.hpp"

namespace dfc {

/// Terminal slope target: k equals theta_g/theta_f outside [-c, c], so
/// K(x) = f'(k) (x>0) / g'(k) (x<0) has support in [-c, c].
struct TargetK {
  StepFunction k;
  double c = 1.0;

  double K(const FluxPair& pair, double x) const {
    if (x < -c) return 0.0;
    if (x > c) return 0.0;
    return x > 0.0 ? pair.f().slope(k(x)) : pair.g().slope(k(x));
  }
  void validate(const FluxPair& pair) const {
    k.check_shape();
    if (!(c > 0.0)) throw std::invalid_argument("target k: c > 0 required");
    if (std::fabs(k.values.front() - pair.theta_g()) > 1e-9 ||
        std::fabs(k.values.back() - pair.theta_f()) > 1e-9)
      throw std::invalid_argument("target k: needs k = theta_g left of -c, theta_f right of c");
  }
};

struct ReducedCost {
  double total = 0.0;
  double term[4] = {0, 0, 0, 0};  // left tail | crossed | plateau | right tail
};

/// Reduced cost J~ over a reachable element: the four terminal-mismatch
/// integrals in descriptor space. The plateau term uses f'(theta_bar_g).
inline ReducedCost cost_Jtilde(const FluxPair& pair, const TargetElement& alpha,
                               const TargetK& target, bool check_membership = true,
                               double quad_tol = 1e-8) {
  if (check_membership) {
    ReachVerdict v = is_reachable(pair, alpha);
    if (!v) throw infeasible_error("cost_Jtilde: element not reachable: " + v.reason);
  }
  const double T = alpha.T;
  auto K = [&](double x) { return target.K(pair, x); };
  std::vector<double> knots = alpha.y_inner.breakpoints;
  knots.insert(knots.end(), target.k.breakpoints.begin(), target.k.breakpoints.end());
  knots.push_back(alpha.xlo);
  knots.push_back(alpha.xhi);
  knots.push_back(-target.c);
  knots.push_back(target.c);

  ReducedCost rc;
  const double lo = std::fmin(alpha.xlo, -target.c) - 1.0;
  const double hi = std::fmax(alpha.xhi, target.c) + 1.0;
  auto sq = [](double v) { return v * v; };
  rc.term[0] = integrate_split(
      [&](double x) { return sq((x - alpha.y(x, Side::right)) / T - K(x)); }, lo, 0.0, knots,
      quad_tol);
  if (alpha.R2 > 1e-14) {
    rc.term[1] = integrate_split(
        [&](double x) {
          const double y = std::fmin(alpha.y(x, Side::right), 0.0);
          const double tp = pair.solve_t_plus(x, y, T);
          return sq(y / tp + K(x));
        },
        0.0, alpha.R2, knots, quad_tol);
  }
  rc.term[2] = integrate_split(
      [&](double x) { return sq(pair.i_plus_min() - K(x)); }, alpha.R2, alpha.R1, knots,
      quad_tol);
  rc.term[3] = integrate_split(
      [&](double x) { return sq((x - alpha.y(x, Side::right)) / T - K(x)); }, alpha.R1, hi,
      knots, quad_tol);
  rc.total = rc.term[0] + rc.term[1] + rc.term[2] + rc.term[3];
  return rc;
}

/// The cost J of the optimal-control problem, evaluated on a forward Godunov
/// solve with the terminal branches of the cost display.
inline double cost_J(const FluxPair& pair, const StepFunction& u0, const TargetK& target,
                     double T, double dx) {
  if (std::fabs(u0.values.front() - pair.theta_g()) > 1e-9 ||
      std::fabs(u0.values.back() - pair.theta_f()) > 1e-9)
    throw std::invalid_argument("cost_J: u0 outside the admissible class (wrong tails)");
  double M = target.c;
  for (double b : u0.breakpoints) M = std::fmax(M, std::fabs(b));
  double speed = 1.0;
  for (double v : {u0.min_value(), u0.max_value()}) {
    speed = std::fmax(speed, std::fabs(pair.f().slope(v)));
    speed = std::fmax(speed, std::fabs(pair.g().slope(v)));
  }
  speed = std::fmax(speed, pair.i_plus_min());
  const double pad = speed * T + 1.0;
  GridSolution g = godunov_solve(pair, u0, T, dx, -M - pad, M + pad);
  auto [R1, R2] = detail::detect_r1_r2(pair, g, T);
  (void)R1;
  const double g_floor = pair.g().min_value();
  double J = 0.0;
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    const double x = g.x_center(i);
    const double u = g.u[i];
    double achieved;
    if (x < 0.0) {
      achieved = pair.g().slope(u);
    } else if (x < R2) {
      const double fv = std::fmax(pair.f().value(u), g_floor);
      achieved = pair.g().slope(pair.g().branch_inverse(fv, Branch::plus));
    } else {
      achieved = pair.f().slope(u);
    }
    const double d = achieved - target.K(pair, x);
    J += d * d;
  }
  return J * g.dx;
}

struct TraceRow {
  int step = 0;
  double J = 0.0;
  double term[4] = {0, 0, 0, 0};
};

struct MinimizeKnobs {
  int n_knots = 16;  // total knots; half per side
  int starts = 16;
  int sweeps = 40;
  double dx = 2e-3;      // grid for the final cost_J evaluation
  std::uint64_t seed = 1;
  int threads = 0;       // 0 = hardware
  double quad_tol = 1e-7;
};

struct MinimizeResult {
  TargetElement alpha;
  StepFunction u0;
  double J_grid = 0.0;
  ReducedCost J_reduced;
  std::vector<TraceRow> trace;
  double M1 = 0.0, M2 = 0.0, M3 = 0.0, R0 = 0.0;
  double baseline_J = 0.0;
  bool improved = true;
  std::string diagnostic;
};

namespace detail {

struct OptBox {
  double T, M1, M2, M3, c1, y0_bound, yc1_bound;
  int nL, nR;
};

struct OptVars {
  double R1, R2, wlo, whi;
  std::vector<double> vL, vR;
};

inline TargetElement vars_to_element(const OptBox& B, const OptVars& v) {
  TargetElement e;
  e.T = B.T;
  e.R1 = v.R1;
  e.R2 = v.R2;
  e.xlo = std::fmin(v.wlo, 0.0);
  e.xhi = std::fmax(v.whi, v.R1);
  MonotoneProfile y;
  y.values.push_back(v.vL.empty() ? 0.0 : v.vL[0]);
  const double Lspan = v.R2 - e.xlo;
  for (int i = 1; i < B.nL; ++i) {
    const double pos = e.xlo + Lspan * i / B.nL;
    if (Lspan > 1e-9) y.push_piece(pos, v.vL[i]);
  }
  if (e.xhi > v.R1 + 1e-12 && !v.vR.empty()) {
    y.push_piece(std::fmax(v.R1, e.xlo + 1e-12), v.vR[0]);
    const double Rspan = e.xhi - v.R1;
    for (int j = 1; j < B.nR; ++j) {
      const double pos = v.R1 + Rspan * j / B.nR;
      y.push_piece(pos, v.vR[j]);
    }
  }
  // guard monotone against numeric dust
  for (std::size_t i = 1; i < y.values.size(); ++i)
    y.values[i] = std::fmax(y.values[i], y.values[i - 1]);
  if (!y.values.empty()) {
    y.values.front() = std::fmax(y.values.front(), e.xlo);
    y.values.back() = std::fmin(y.values.back(), e.xhi);
    for (std::size_t i = y.values.size(); i-- > 1;)
      y.values[i - 1] = std::fmin(y.values[i - 1], y.values[i]);
  }
  e.y_inner = std::move(y);
  return e;
}

}  // namespace detail

/// Constructive minimization of J per the proof's route: reduce to J~ over
/// the reachable elements inside the derived search box, projected coordinate
/// descent with multi-start, then realize the best element backward.
inline MinimizeResult minimize(const FluxPair& pair, const TargetK& target, double T,
                               MinimizeKnobs knobs = {}) {
  target.validate(pair);
  MinimizeResult res;
  const double pbar = pair.i_plus_min();
  const double c = target.c;
  res.R0 = pair.chord_f(pair.theta_bar_g(), pair.theta_f()) * T;

  // baseline cost bound M1: the quiescent Riemann datum's reduced cost
  auto Ksq = [&](double x) {
    const double k = target.K(pair, x);
    return k * k;
  };
  res.M1 = integrate_split(Ksq, -c, 0.0, target.k.breakpoints) +
           integrate_split(Ksq, res.R0, std::fmax(res.R0, c), target.k.breakpoints) +
           integrate_split(
               [&](double x) {
                 const double d = pbar - target.K(pair, x);
                 return d * d;
               },
               0.0, res.R0, target.k.breakpoints);

  // box bound M2: smallest R whose transfer-growth integral exceeds 2 M1
  {
    const double lo = std::fmax(c, pbar * T);
    const double cap = pair.p_max() * T * 0.999;
    auto grow = [&](double R) {
      return integrate(
          [&](double x) {
            const double h = pair.h_plus(std::fmax(x / T, pbar));
            return h * h;
          },
          lo, R, 1e-9);
    };
    double R = lo + 1.0;
    while (R < cap && grow(R) <= 2.0 * res.M1) R *= 2.0;
    R = std::fmin(R, cap);
    double a = lo, b = R;
    for (int it = 0; it < 60; ++it) {
      const double m = 0.5 * (a + b);
      (grow(m) > 2.0 * res.M1 ? b : a) = m;
    }
    res.M2 = std::fmax(b, pbar * T + c) + 1e-6;
  }
  const double c1 = std::fmax(res.M2, c);
  res.M3 = c1 + std::cbrt(18.0 * T * T * res.M1);

  detail::OptBox B{T,    res.M1, res.M2, res.M3, c1, std::cbrt(18.0 * T * T * res.M1),
                   c1 + std::cbrt(12.0 * res.M1 * T * T),
                   std::max(1, knobs.n_knots / 2), std::max(1, knobs.n_knots / 2)};

  // fixed-point cache over quantized R1
  std::map<long, double> xi0_cache;
  std::mutex cache_mu;
  auto xi0_of = [&](double R1) {
    if (detail::time_T1(pair, R1, T) < -1e-12) return -1e300;  // condition (2) vacuous
    const long key = static_cast<long>(std::floor(R1 / 1e-7));
    {
      std::lock_guard<std::mutex> lk(cache_mu);
      auto it = xi0_cache.find(key);
      if (it != xi0_cache.end()) return it->second;
    }
    const double v = find_fixed_point(pair, R1, T, 256).xi0;
    std::lock_guard<std::mutex> lk(cache_mu);
    xi0_cache[key] = v;
    return v;
  };

  auto project = [&](detail::OptVars& v) {
    v.R1 = std::fmin(std::fmax(v.R1, 0.0), B.M2);
    v.R2 = std::fmin(std::fmax(v.R2, 0.0), v.R1);
    if (detail::time_T1(pair, v.R1, T) < -1e-12) v.R2 = v.R1;  // condition (3)
    v.wlo = std::fmin(std::fmax(v.wlo, -B.M3), 0.0);
    v.whi = std::fmin(std::fmax(v.whi, v.R1), B.M3);
    const double Lspan = v.R2 - v.wlo;
    for (int i = 0; i < B.nL; ++i) {
      double floor_i = std::fmax(v.wlo, -B.M3);
      const double pos = v.wlo + Lspan * i / B.nL;
      if (pos >= 0.0) floor_i = std::fmax(floor_i, -B.y0_bound);  // |y(0+)| box
      v.vL[i] = std::fmin(std::fmax(v.vL[i], floor_i), 0.0);
      if (i) v.vL[i] = std::fmax(v.vL[i], v.vL[i - 1]);
    }
    if (detail::time_T1(pair, v.R2, T) < 1e-9)  // zero-foot screen
      for (double& q : v.vL) q = std::fmin(q, -1e-6);
    const double xi0 = xi0_of(v.R1);
    if (xi0 > v.whi) v.whi = std::fmin(std::fmax(xi0 + 1e-9, v.whi), B.M3);
    const double Rspan = v.whi - v.R1;
    for (int j = 0; j < B.nR; ++j) {
      double cap_j = std::fmin(v.whi, B.M3);
      const double pos = v.R1 + Rspan * j / B.nR;
      if (pos <= B.c1) cap_j = std::fmin(cap_j, B.yc1_bound);  // y(c1) box
      v.vR[j] = std::fmin(std::fmax(v.vR[j], std::fmax(0.0, xi0)), cap_j);
      if (j) v.vR[j] = std::fmax(v.vR[j], v.vR[j - 1]);
    }
  };

  auto objective = [&](detail::OptVars v) -> ReducedCost {
    project(v);
    const TargetElement e = detail::vars_to_element(B, v);
    try {
      return cost_Jtilde(pair, e, target, false, knobs.quad_tol);
    } catch (const std::exception&) {
      ReducedCost bad;
      bad.total = 1e300;  // infeasible iterate during a line search
      return bad;
    }
  };

  // multi-start projected coordinate descent; per-start outcomes are merged
  // deterministically afterwards so reports do not depend on thread timing
  struct StartOutcome {
    detail::OptVars vars;
    ReducedCost rc;
    std::vector<ReducedCost> accepted;  // value after each improving sweep
    bool ok = false;
  };
  std::vector<StartOutcome> outcomes(knobs.starts);

  auto run_start = [&](int start_idx) {
    std::mt19937_64 rng(knobs.seed * 7919 + start_idx);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    detail::OptVars v;
    v.vL.assign(B.nL, 0.0);
    v.vR.assign(B.nR, 0.0);
    if (start_idx == 0) {  // the quiescent-baseline element
      v.R1 = v.R2 = res.R0;
      v.wlo = 0.0;
      v.whi = res.R0;
    } else if (start_idx == 1) {  // near-identity
      v.R1 = v.R2 = 1e-3;
      v.wlo = -1e-3;
      v.whi = 2e-3;
      v.vR.assign(B.nR, 1e-3);
    } else {
      v.R1 = U(rng) * std::fmin(B.M2, pbar * T + c);
      v.R2 = U(rng) * v.R1;
      v.wlo = -U(rng) * B.M3;
      v.whi = v.R1 + U(rng) * (B.M3 - v.R1);
      double acc = v.wlo;
      for (int i = 0; i < B.nL; ++i) {
        acc += U(rng) * (-acc) / (B.nL - i);
        v.vL[i] = std::fmin(acc, 0.0);
      }
      double accr = 0.0;
      for (int j = 0; j < B.nR; ++j) {
        accr += U(rng) * (v.whi - accr) / (B.nR - j);
        v.vR[j] = accr;
      }
    }
    project(v);
    ReducedCost cur = objective(v);

    auto coord_opt = [&](auto get, auto set, double lo, double hi) {
      const double saved = get(v);
      auto f1 = [&](double q) {
        detail::OptVars w = v;
        set(w, q);
        return objective(w).total;
      };
      auto [q, val] = grid_golden_min(f1, lo, hi, 17, 1e-9);
      if (val < cur.total - 1e-14) {
        set(v, q);
        project(v);
        cur = objective(v);
      } else {
        set(v, saved);
      }
    };

    for (int sweep = 0; sweep < knobs.sweeps; ++sweep) {
      const double before = cur.total;
      coord_opt([](const detail::OptVars& w) { return w.R1; },
                [](detail::OptVars& w, double q) { w.R1 = q; }, 0.0, B.M2);
      coord_opt([](const detail::OptVars& w) { return w.R2; },
                [](detail::OptVars& w, double q) { w.R2 = q; }, 0.0, v.R1);
      coord_opt([](const detail::OptVars& w) { return w.wlo; },
                [](detail::OptVars& w, double q) { w.wlo = q; }, -B.M3, 0.0);
      coord_opt([](const detail::OptVars& w) { return w.whi; },
                [](detail::OptVars& w, double q) { w.whi = q; }, v.R1, B.M3);
      for (int i = 0; i < B.nL; ++i)
        coord_opt([i](const detail::OptVars& w) { return w.vL[i]; },
                  [i](detail::OptVars& w, double q) { w.vL[i] = q; }, -B.M3, 0.0);
      for (int j = 0; j < B.nR; ++j)
        coord_opt([j](const detail::OptVars& w) { return w.vR[j]; },
                  [j](detail::OptVars& w, double q) { w.vR[j] = q; }, 0.0, B.M3);
      if (cur.total < before - 1e-14) outcomes[start_idx].accepted.push_back(cur);
      if (before - cur.total < 1e-12 * (1.0 + before)) break;
    }
    outcomes[start_idx].vars = v;
    outcomes[start_idx].rc = cur;
    outcomes[start_idx].ok = true;
  };

  int nthreads = knobs.threads > 0 ? knobs.threads
                                   : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, knobs.starts);
  {
    std::vector<std::thread> pool;
    std::mutex next_mu;
    int next = 0;
    for (int w = 0; w < nthreads; ++w)
      pool.emplace_back([&]() {
        for (;;) {
          int idx;
          {
            std::lock_guard<std::mutex> lk(next_mu);
            if (next >= knobs.starts) return;
            idx = next++;
          }
          try {
            run_start(idx);
          } catch (const std::exception&) {
            // a start that wandered infeasible is simply abandoned
          }
        }
      });
    for (auto& th : pool) th.join();
  }

  // deterministic reduction: replay improvements in start order
  double best_J = 1e300;
  int best_idx = -1;
  int trace_step = 0;
  for (int idx = 0; idx < knobs.starts; ++idx) {
    if (!outcomes[idx].ok) continue;
    for (const ReducedCost& rc : outcomes[idx].accepted) {
      if (rc.total < best_J - 1e-14) {
        best_J = rc.total;
        TraceRow row;
        row.step = trace_step++;
        row.J = rc.total;
        for (int q = 0; q < 4; ++q) row.term[q] = rc.term[q];
        res.trace.push_back(row);
      }
    }
    if (outcomes[idx].rc.total < best_J - 1e-14 || best_idx < 0) {
      best_J = std::fmin(best_J, outcomes[idx].rc.total);
      best_idx = best_idx < 0 || outcomes[idx].rc.total <=
                                     outcomes[best_idx].rc.total - 1e-14
                     ? idx
                     : best_idx;
    }
  }
  if (best_idx < 0) throw infeasible_error("minimize: every start failed");
  detail::OptVars best_vars = outcomes[best_idx].vars;
  ReducedCost best_rc = outcomes[best_idx].rc;

  project(best_vars);
  res.alpha = detail::vars_to_element(B, best_vars);
  res.J_reduced = best_rc;

  BlockSolution sol = realize_target(pair, res.alpha);
  res.u0 = sol.u0;
  res.J_grid = cost_J(pair, res.u0, target, T, knobs.dx);
  StepFunction w0;
  w0.breakpoints = {0.0};
  w0.values = {pair.theta_g(), pair.theta_f()};
  res.baseline_J = cost_J(pair, w0, target, T, knobs.dx);
  if (res.J_grid > res.baseline_J + 1e-9) {
    res.improved = false;
    res.diagnostic = "optimizer did not beat the quiescent baseline; returning w0";
    res.u0 = w0;
    res.J_grid = res.baseline_J;
  }
  return res;
}

}  // namespace dfc
