#pragma once

#include <cmath>
#include <utility>

#include "dfc/errors.hpp"

namespace dfc {

struct RootOptions {
  double tol = 1e-12;  // residual tolerance
  int max_iter = 200;
};

/// Bisection for a monotone non-decreasing function with fn(lo) <= 0 <= fn(hi).
/// Returns the point where |fn| first drops below tol (or the midpoint after
/// the interval collapses).
template <class F>
double bisect_increasing(F&& fn, double lo, double hi, RootOptions opt = {}) {
  double flo = fn(lo);
  double fhi = fn(hi);
  if (flo > 0.0 && flo < opt.tol) return lo;
  if (fhi < 0.0 && -fhi < opt.tol) return hi;
  if (flo > 0.0 || fhi < 0.0)
    throw infeasible_error("bisect: root not bracketed on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < opt.max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if (std::fabs(fm) < opt.tol || 0.5 * (hi - lo) < 1e-16 * (1.0 + std::fabs(mid))) return mid;
    if (fm < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

/// Golden-section minimization on [lo, hi]; fn need not be smooth.
template <class F>
double golden_min(F&& fn, double lo, double hi, double tol = 1e-10, int max_iter = 200) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < max_iter && (b - a) > tol * (1.0 + std::fabs(a) + std::fabs(b)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = fn(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

/// Two-dimensional Nelder-Mead refinement from a starting point; returns the
/// best (x, y, f). Coordinates are clamped to the given boxes by the caller's
/// objective (out-of-box evaluations should return a large value).
template <class F>
void nelder_mead_2d(F&& fn, double& x, double& y, double& fbest, double hx, double hy,
                    int max_iter = 240, double ftol = 1e-13) {
  struct P {
    double x, y, f;
  };
  P s[3] = {{x, y, fn(x, y)}, {x + hx, y, 0.0}, {x, y + hy, 0.0}};
  s[1].f = fn(s[1].x, s[1].y);
  s[2].f = fn(s[2].x, s[2].y);
  auto sort3 = [&]() {
    if (s[0].f > s[1].f) std::swap(s[0], s[1]);
    if (s[1].f > s[2].f) std::swap(s[1], s[2]);
    if (s[0].f > s[1].f) std::swap(s[0], s[1]);
  };
  sort3();
  for (int it = 0; it < max_iter; ++it) {
    if (std::fabs(s[2].f - s[0].f) < ftol * (1.0 + std::fabs(s[0].f))) break;
    const double cx = 0.5 * (s[0].x + s[1].x), cy = 0.5 * (s[0].y + s[1].y);
    P r{cx + (cx - s[2].x), cy + (cy - s[2].y), 0.0};
    r.f = fn(r.x, r.y);
    if (r.f < s[0].f) {
      P e{cx + 2.0 * (cx - s[2].x), cy + 2.0 * (cy - s[2].y), 0.0};
      e.f = fn(e.x, e.y);
      s[2] = e.f < r.f ? e : r;
    } else if (r.f < s[1].f) {
      s[2] = r;
    } else {
      P c{cx + 0.5 * (s[2].x - cx), cy + 0.5 * (s[2].y - cy), 0.0};
      c.f = fn(c.x, c.y);
      if (c.f < s[2].f) {
        s[2] = c;
      } else {
        for (int k = 1; k < 3; ++k) {
          s[k].x = 0.5 * (s[k].x + s[0].x);
          s[k].y = 0.5 * (s[k].y + s[0].y);
          s[k].f = fn(s[k].x, s[k].y);
        }
      }
    }
    sort3();
  }
  if (s[0].f < fbest) {
    x = s[0].x;
    y = s[0].y;
    fbest = s[0].f;
  }
}

/// Seeds a uniform grid, then refines the best bracket by golden section.
/// Returns (argmin, min).
template <class F>
std::pair<double, double> grid_golden_min(F&& fn, double lo, double hi, int grid_points,
                                          double tol = 1e-10) {
  if (!(hi > lo)) return {lo, fn(lo)};
  if (grid_points < 3) grid_points = 3;
  double best_x = lo, best_f = fn(lo);
  const double h = (hi - lo) / (grid_points - 1);
  for (int i = 1; i < grid_points; ++i) {
    const double x = lo + i * h;
    const double f = fn(x);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
  }
  const double a = std::fmax(lo, best_x - h);
  const double b = std::fmin(hi, best_x + h);
  const double xr = golden_min(fn, a, b, tol);
  const double fr = fn(xr);
  if (fr < best_f) return {xr, fr};
  return {best_x, best_f};
}

}  // namespace dfc
