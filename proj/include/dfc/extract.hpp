#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dfc/flux.hpp"
#include "dfc/godunov.hpp"
#include "dfc/profile.hpp"

namespace dfc {

struct ExtractResult {
  TargetElement elem;
  bool ok = true;
  std::string diagnostic;
};

namespace detail {

inline std::vector<double> smooth5(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  const long n = static_cast<long>(v.size());
  for (long i = 0; i < n; ++i) {
    double s = 0.0;
    int c = 0;
    for (long j = std::max(0L, i - 2); j <= std::min(n - 1, i + 2); ++j) {
      s += v[j];
      ++c;
    }
    out[i] = s / c;
  }
  return out;
}

/// Locate R1(T) and R2(T) on a terminal grid profile. R1 is where the f-side
/// backtrace y = x - T f'(u) stops being negative; R2 is where u drops to
/// theta_bar_g (the crossed region carries u > theta_bar_g).
inline std::pair<double, double> detect_r1_r2(const FluxPair& pair, const GridSolution& g,
                                              double T, double noise = 0.0) {
  const std::size_t iz = g.interface_index;
  const double tol_y = std::fmax(3.0 * g.dx, noise);
  std::vector<double> yf(g.u.size() - iz);
  for (std::size_t i = iz; i < g.u.size(); ++i)
    yf[i - iz] = g.x_center(i) - T * pair.f().slope(g.u[i]);
  yf = smooth5(yf);
  double R1 = 0.0;
  for (std::size_t k = 0; k < yf.size(); ++k)
    if (yf[k] < -tol_y) R1 = g.x_center(iz + k) + 0.5 * g.dx;
  const double tol_u = std::fmax(0.02, 10.0 * g.dx);
  double R2 = 0.0;
  std::vector<double> us(g.u.begin() + iz, g.u.end());
  us = smooth5(us);
  for (std::size_t k = 0; k < us.size(); ++k) {
    const double x = g.x_center(iz + k);
    if (x > R1) break;
    if (us[k] > pair.theta_bar_g() + tol_u) R2 = x + 0.5 * g.dx;
  }
  R2 = std::fmin(R2, R1);
  return {R1, R2};
}

/// Largest-window monotone projection (pool adjacent violators).
inline void isotonic(std::vector<double>& v) {
  std::vector<double> val;
  std::vector<int> cnt;
  for (double x : v) {
    val.push_back(x);
    cnt.push_back(1);
    while (val.size() > 1 && val[val.size() - 2] > val.back()) {
      const double m =
          (val[val.size() - 2] * cnt[cnt.size() - 2] + val.back() * cnt.back()) /
          (cnt[cnt.size() - 2] + cnt.back());
      cnt[cnt.size() - 2] += cnt.back();
      val[val.size() - 2] = m;
      val.pop_back();
      cnt.pop_back();
    }
  }
  std::size_t k = 0;
  for (std::size_t b = 0; b < val.size(); ++b)
    for (int c = 0; c < cnt[b]; ++c) v[k++] = val[b];
}

}  // namespace detail

/// Terminal descriptor read off a forward Godunov solve: backtraces on the
/// classical regions, the interface-transfer fit on (0, R2).
inline ExtractResult extract_element(const FluxPair& pair, const StepFunction& u0, double T,
                                     double dx, double xlo, double xhi) {
  GridSolution g = godunov_solve(pair, u0, T, dx, xlo, xhi);
  ExtractResult out;
  auto [R1, R2] = detail::detect_r1_r2(pair, g, T);
  out.elem.T = T;
  out.elem.R1 = R1;
  out.elem.R2 = R2;

  // backtraced feet per cell, smoothed per monotone stretch (the smoothing
  // window must not blend across the interface or across [R2, R1])
  std::vector<double> xs, ys;
  const double pbar = pair.i_plus_min();
  std::vector<double> seg_l, seg_c, seg_r, sx_l, sx_c, sx_r;
  for (std::size_t i = 0; i < g.u.size(); ++i) {
    const double x = g.x_center(i);
    if (x > xhi - 5 * dx || x < xlo + 5 * dx) continue;
    if (x < 0.0) {
      sx_l.push_back(x);
      seg_l.push_back(x - T * pair.g().slope(g.u[i]));
    } else if (x < R2) {
      // transfer identity: foot = -t_+ h_+(f'(u)), t_+ = T - x/f'(u)
      const double p = std::fmax(pair.f().slope(g.u[i]), pbar);
      const double tp = std::fmax(T - x / std::fmax(p, 1e-12), 0.0);
      sx_c.push_back(x);
      seg_c.push_back(-tp * pair.h_plus(p));
    } else if (x <= R1 + 3 * dx) {
      continue;  // y undefined on [R2, R1]
    } else {
      sx_r.push_back(x);
      seg_r.push_back(x - T * pair.f().slope(g.u[i]));
    }
  }
  double worst = 0.0;
  for (auto* seg : {&seg_l, &seg_c, &seg_r}) {
    *seg = detail::smooth5(*seg);
    for (std::size_t i = 1; i < seg->size(); ++i)
      worst = std::fmax(worst, (*seg)[i - 1] - (*seg)[i]);
  }
  if (worst > std::fmax(0.05, 30.0 * dx)) {
    out.ok = false;
    out.diagnostic = "backtraced y not monotone beyond grid noise (worst drop " +
                     std::to_string(worst) + ")";
  }
  const double snap = std::fmax(0.03, 15.0 * dx);
  if (!seg_c.empty() && seg_c.back() > -snap) seg_c.back() = std::fmin(seg_c.back(), 0.0);
  if (!seg_r.empty()) {
    // the reflected-characteristics bound holds for exact solutions; snap
    // grid-level undershoot of y(R1+) back onto xi0
    try {
      const double xi0 = find_fixed_point(pair, R1, T).xi0;
      if (seg_r.front() < xi0 && seg_r.front() > xi0 - snap) {
        for (double& v : seg_r)
          v = std::fmax(v, xi0);
      }
    } catch (const std::exception&) {
    }
  }
  xs = sx_l;
  xs.insert(xs.end(), sx_c.begin(), sx_c.end());
  xs.insert(xs.end(), sx_r.begin(), sx_r.end());
  std::vector<double> ys_s = seg_l;
  ys_s.insert(ys_s.end(), seg_c.begin(), seg_c.end());
  ys_s.insert(ys_s.end(), seg_r.begin(), seg_r.end());
  detail::isotonic(ys_s);

  // identity window: trim where |y - x| is below grid noise
  const double idtol = std::fmax(0.02, 10.0 * dx);
  std::size_t a = 0, b = ys_s.size();
  while (a < ys_s.size() && xs[a] < -1e-12 && std::fabs(ys_s[a] - xs[a]) < idtol) ++a;
  while (b > a && xs[b - 1] > R1 && std::fabs(ys_s[b - 1] - xs[b - 1]) < idtol) --b;
  if (a == b) {
    out.elem.xlo = out.elem.xhi = 0.0;
    out.elem.y_inner = MonotoneProfile::constant(0.0);
    return out;
  }
  out.elem.xlo = xs[a] - 0.5 * dx;
  out.elem.xhi = xs[b - 1] + 0.5 * dx;
  MonotoneProfile y;
  y.values.push_back(std::fmax(ys_s[a], out.elem.xlo));
  for (std::size_t i = a + 1; i < b; ++i) {
    if (std::fabs(ys_s[i] - y.values.back()) < 1e-12 && xs[i] <= R1) continue;
    y.push_piece(0.5 * (xs[i - 1] + xs[i]), std::fmax(ys_s[i], y.values.back()));
  }
  y.values.back() = std::fmin(y.values.back(), out.elem.xhi);
  detail::isotonic(y.values);
  out.elem.y_inner = std::move(y);
  return out;
}

}  // namespace dfc
