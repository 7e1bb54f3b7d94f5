#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dfc/errors.hpp"
#include "dfc/flux.hpp"
#include "dfc/profile.hpp"

namespace dfc {

/// Finite-volume state with the interface x = 0 aligned to a cell boundary.
struct GridSolution {
  double dx = 0.0;
  double x_left = 0.0;  // left edge of cell 0; x_left = -interface_index * dx
  std::vector<double> u;
  double time = 0.0;
  std::size_t interface_index = 0;  // flux index of the x = 0 boundary

  double x_center(std::size_t i) const { return x_left + (i + 0.5) * dx; }
  double mass() const {
    double s = 0.0;
    for (double v : u) s += v;
    return s * dx;
  }
};

/// Cell averages of a step function (exact, sub-cell breakpoints included).
inline GridSolution make_grid(const StepFunction& u0, double xlo, double xhi, double dx) {
  if (!(dx > 0.0) || !(xhi > xlo)) throw std::invalid_argument("make_grid: bad extents");
  const std::size_t nl = static_cast<std::size_t>(std::ceil(-xlo / dx - 1e-9));
  const std::size_t nr = static_cast<std::size_t>(std::ceil(xhi / dx - 1e-9));
  GridSolution g;
  g.dx = dx;
  g.interface_index = nl;
  g.x_left = -static_cast<double>(nl) * dx;
  g.u.resize(nl + nr);
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    const double a = g.x_left + i * dx, b = a + dx;
    auto lo = std::upper_bound(u0.breakpoints.begin(), u0.breakpoints.end(), a);
    auto hi = std::lower_bound(u0.breakpoints.begin(), u0.breakpoints.end(), b);
    if (lo >= hi) {
      g.u[i] = u0((a + b) / 2.0);
    } else {
      double acc = 0.0, prev = a;
      for (auto it = lo; it != hi; ++it) {
        acc += (*it - prev) * u0.eval(*it, Side::left);
        prev = *it;
      }
      acc += (b - prev) * u0.eval(b, Side::left);
      g.u[i] = acc / dx;
    }
  }
  return g;
}

namespace detail {

struct QuadEval {
  double a, b, c;
  double operator()(double u) const { return a * (u - b) * (u - b) + c; }
};
struct FnEval {
  const ConvexFlux* fl;
  double operator()(double u) const { return fl->value(u); }
};

/// Godunov flux of a quadratic flux A(u-B)^2+C, branch-free:
/// G(a,b) = A * max( max(a-B,0)^2, min(b-B,0)^2 ) + C.
inline double quad_godunov(double a, double b, double A, double B, double C) {
  const double d1 = std::fmax(a - B, 0.0);
  const double d2 = std::fmin(b - B, 0.0);
  return A * std::fmax(d1 * d1, d2 * d2) + C;
}

/// Fused flux+update sweep over cells [lo, hi): the left-edge flux enters as
/// `fl`, state and flux carries avoid a second pass over memory. `u_right` is
/// the original value of cell `hi` (or the outflow ghost); returns the flux
/// leaving through the right edge of cell hi-1.
inline double quad_sweep(double* u, std::size_t lo, std::size_t hi, double u_right, double fl,
                         double lambda, double A, double B, double C) {
  double uL = u[lo];
  for (std::size_t j = lo; j + 1 < hi; ++j) {
    const double uR = u[j + 1];
    const double fr = quad_godunov(uL, uR, A, B, C);
    u[j] = uL - lambda * (fr - fl);
    uL = uR;
    fl = fr;
  }
  const double fr = quad_godunov(uL, u_right, A, B, C);
  u[hi - 1] = uL - lambda * (fr - fl);
  return fr;
}

/// One conservative update. Interior fluxes are classical Godunov for the
/// side's convex flux, G(a,b) = max(F(max(a,th)), F(min(b,th))); the x = 0
/// boundary uses F(uL,uR) = max(g(max(uL,th_g)), f(min(uR,th_f))).
template <class GE, class FE>
void step_kernel(const GE& Gf, double th_g, const FE& Ff, double th_f, GridSolution& grid,
                 double lambda /* dt/dx */) {
  const std::size_t n = grid.u.size();
  const std::size_t iz = grid.interface_index;
  std::vector<double>& u = grid.u;
  static thread_local std::vector<double> flux;
  flux.resize(n + 1);
  flux[0] = Gf(u[0]);  // outflow ghost: G(u,u) = g(u)
  for (std::size_t j = 1; j < iz; ++j)
    flux[j] = std::fmax(Gf(std::fmax(u[j - 1], th_g)), Gf(std::fmin(u[j], th_g)));
  flux[iz] = std::fmax(Gf(std::fmax(u[iz - 1], th_g)), Ff(std::fmin(u[iz], th_f)));
  for (std::size_t j = iz + 1; j < n; ++j)
    flux[j] = std::fmax(Ff(std::fmax(u[j - 1], th_f)), Ff(std::fmin(u[j], th_f)));
  flux[n] = Ff(u[n - 1]);
  for (std::size_t j = 0; j < n; ++j) u[j] -= lambda * (flux[j + 1] - flux[j]);
}

/// Specialization for a pair of quadratic fluxes (the hot path): one fused
/// pass per side with the interface flux pinned between them.
inline void step_kernel_quad(const QuadEval& Gq, const QuadEval& Fq, GridSolution& grid,
                             double lambda) {
  const std::size_t n = grid.u.size();
  const std::size_t iz = grid.interface_index;
  double* u = grid.u.data();
  const double f_interface =
      std::fmax(Gq(std::fmax(u[iz - 1], Gq.b)), Fq(std::fmin(u[iz], Fq.b)));
  // left side: outflow ghost on the left, interface flux pinned on the right
  {
    double uL = u[0];
    double fl = Gq(uL);
    for (std::size_t j = 0; j + 1 < iz; ++j) {
      const double uR = u[j + 1];
      const double fr = quad_godunov(uL, uR, Gq.a, Gq.b, Gq.c);
      u[j] = uL - lambda * (fr - fl);
      uL = uR;
      fl = fr;
    }
    u[iz - 1] = uL - lambda * (f_interface - fl);
  }
  // right side
  {
    double uL = u[iz];
    double fl = f_interface;
    for (std::size_t j = iz; j + 1 < n; ++j) {
      const double uR = u[j + 1];
      const double fr = quad_godunov(uL, uR, Fq.a, Fq.b, Fq.c);
      u[j] = uL - lambda * (fr - fl);
      uL = uR;
      fl = fr;
    }
    u[n - 1] = uL - lambda * (Fq(uL) - fl);
  }
}

/// Wave-speed bound for the coupled system. The interface can emit states not
/// present in the data, bounded per side by the plus-branch image of the other
/// side's flux range (plus the theta_bar family itself).
inline double max_wave_speed(const FluxPair& pair, const GridSolution& g) {
  const std::size_t iz = g.interface_index;
  double lo_l = pair.theta_g(), hi_l = pair.theta_g();
  double lo_r = pair.theta_bar_g(), hi_r = pair.theta_bar_g();
  for (std::size_t i = 0; i < iz; ++i) {
    lo_l = std::fmin(lo_l, g.u[i]);
    hi_l = std::fmax(hi_l, g.u[i]);
  }
  for (std::size_t i = iz; i < g.u.size(); ++i) {
    lo_r = std::fmin(lo_r, g.u[i]);
    hi_r = std::fmax(hi_r, g.u[i]);
  }
  lo_r = std::fmin(lo_r, pair.theta_dbar_g());
  const double Bf = pair.f().domain_bound() * (1.0 - 1e-9);
  const double Bg = pair.g().domain_bound() * (1.0 - 1e-9);
  const double g_flux_max = std::fmax(pair.g().value(lo_l), pair.g().value(hi_l));
  const double f_flux_max = std::fmax(pair.f().value(lo_r), pair.f().value(hi_r));
  hi_r = std::fmax(
      hi_r, pair.f().branch_inverse(std::fmin(g_flux_max, pair.f().value(Bf)), Branch::plus));
  hi_l = std::fmax(
      hi_l, pair.g().branch_inverse(std::fmin(f_flux_max, pair.g().value(Bg)), Branch::plus));
  double s = 0.0;
  for (double v : {lo_l, hi_l}) s = std::fmax(s, std::fabs(pair.g().slope(v)));
  for (double v : {lo_r, hi_r}) s = std::fmax(s, std::fabs(pair.f().slope(v)));
  return s;
}

}  // namespace detail

/// Single explicit step; dt must satisfy the CFL condition dt*max|F'|/dx <= 0.45.
/// Conservation is asserted against the boundary-flux prediction each call.
inline void godunov_step(const FluxPair& pair, GridSolution& grid, double dt) {
  const double speed = detail::max_wave_speed(pair, grid);
  if (dt * speed / grid.dx > 0.45 + 1e-12)
    throw std::invalid_argument("godunov_step: CFL violation (dt*max|F'|/dx > 0.45)");
  const double mass_before = grid.mass();
  const double lam = dt / grid.dx;
  const auto* qf = pair.f().as_quadratic();
  const auto* qg = pair.g().as_quadratic();
  // boundary fluxes for the conservation ledger (outflow ghosts)
  const double fL = pair.g().value(grid.u.front());
  const double fR = pair.f().value(grid.u.back());
  if (qf && qg) {
    detail::step_kernel_quad(detail::QuadEval{qg->a, qg->b, qg->c},
                             detail::QuadEval{qf->a, qf->b, qf->c}, grid, lam);
  } else {
    detail::step_kernel(detail::FnEval{&pair.g()}, pair.theta_g(), detail::FnEval{&pair.f()},
                        pair.theta_f(), grid, lam);
  }
  grid.time += dt;
  const double mass_after = grid.mass();
  const double expected = mass_before - dt * (fR - fL);
  const double scale = std::fabs(mass_before) + std::fabs(fR) + std::fabs(fL) + 1.0;
  if (std::fabs(mass_after - expected) > 1e-10 * scale * std::sqrt(double(grid.u.size())))
    throw std::runtime_error("godunov_step: conservation ledger violated");
}

/// Advance to t_end with a fixed CFL number. The per-step conservation check
/// is amortized (checked on the final step and every 256th one).
inline void godunov_run(const FluxPair& pair, GridSolution& grid, double t_end,
                        double cfl = 0.45) {
  if (!(cfl > 0.0) || cfl > 0.45 + 1e-12)
    throw std::invalid_argument("godunov_run: cfl must lie in (0, 0.45]");
  double dt0 = cfl * grid.dx / std::fmax(detail::max_wave_speed(pair, grid), 1e-12);
  const auto* qf = pair.f().as_quadratic();
  const auto* qg = pair.g().as_quadratic();
  double mass_ref = grid.mass();
  double flux_acc = 0.0;
  long step = 0;
  while (grid.time < t_end - 1e-14) {
    const double dt = std::fmin(dt0, t_end - grid.time);
    const double lam = dt / grid.dx;
    const double fL = pair.g().value(grid.u.front());
    const double fR = pair.f().value(grid.u.back());
    if (qf && qg) {
      detail::step_kernel_quad(detail::QuadEval{qg->a, qg->b, qg->c},
                               detail::QuadEval{qf->a, qf->b, qf->c}, grid, lam);
    } else {
      detail::step_kernel(detail::FnEval{&pair.g()}, pair.theta_g(), detail::FnEval{&pair.f()},
                          pair.theta_f(), grid, lam);
    }
    grid.time += dt;
    flux_acc += dt * (fR - fL);
    ++step;
    if ((step & 255) == 0 || grid.time >= t_end - 1e-14) {
      const double scale = std::fabs(mass_ref) + 1.0;
      if (std::fabs(grid.mass() - (mass_ref - flux_acc)) >
          1e-9 * scale * std::sqrt(double(grid.u.size())) * step)
        throw std::runtime_error("godunov_run: conservation ledger violated");
      // the invariant-region bound only shrinks as transients leave
      dt0 = cfl * grid.dx / std::fmax(detail::max_wave_speed(pair, grid), 1e-12);
    }
  }
}

/// Solve from step-function data on a domain padded by the maximum wave speed.
inline GridSolution godunov_solve(const FluxPair& pair, const StepFunction& u0, double T,
                                  double dx, double xlo, double xhi, double cfl = 0.45) {
  GridSolution g = make_grid(u0, xlo, xhi, dx);
  godunov_run(pair, g, T, cfl);
  return g;
}

/// L1 distance of two grid solutions on a common window [a, b].
inline double l1_distance(const GridSolution& u, const GridSolution& v, double a, double b) {
  double s = 0.0;
  const double dx = std::fmin(u.dx, v.dx) / 2.0;
  const int n = static_cast<int>(std::ceil((b - a) / dx));
  auto cell = [](const GridSolution& g, double x) {
    const long i = static_cast<long>(std::floor((x - g.x_left) / g.dx));
    if (i < 0 || i >= static_cast<long>(g.u.size())) return g.u[i < 0 ? 0 : g.u.size() - 1];
    return g.u[static_cast<std::size_t>(i)];
  };
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * (i + 0.5) / n;
    s += std::fabs(cell(u, x) - cell(v, x));
  }
  return s * (b - a) / n;
}

/// L1 distance between a grid solution and a reference function on [a, b].
inline double l1_distance_to(const GridSolution& u, const std::function<double(double)>& ref,
                             double a, double b, int samples_per_cell = 2) {
  double s = 0.0;
  const int n = static_cast<int>(std::ceil((b - a) / u.dx)) * samples_per_cell;
  for (int i = 0; i < n; ++i) {
    const double x = a + (b - a) * (i + 0.5) / n;
    const long ci = static_cast<long>(std::floor((x - u.x_left) / u.dx));
    const double uv = (ci < 0 || ci >= static_cast<long>(u.u.size()))
                          ? u.u[ci < 0 ? 0 : u.u.size() - 1]
                          : u.u[static_cast<std::size_t>(ci)];
    s += std::fabs(uv - ref(x));
  }
  return s * (b - a) / n;
}

}  // namespace dfc
