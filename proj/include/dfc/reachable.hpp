#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dfc/errors.hpp"
#include "dfc/flux.hpp"
#include "dfc/profile.hpp"

namespace dfc {

/// The internal shock curve s_xi of the reflected rarefaction, built
/// backwards from (R1, T) through the discrete states of the fan centered at
/// (xi, 0). Nodes are stored with increasing t; s(ts.back()) = R1.
struct XiCurve {
  double xi = 0.0;
  double t0 = 0.0;                // start time t_0(xi)
  std::vector<double> ts, xs;     // polyline nodes
  double x_at(double t) const {
    if (t <= ts.front()) return xs.front();
    if (t >= ts.back()) return xs.back();
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return xs[i - 1] + w * (xs[i] - xs[i - 1]);
  }
};

struct FixedPoint {
  double xi0 = 0.0;
  double tau0 = 0.0;
  XiCurve s;
};

namespace detail {
inline double time_T1(const FluxPair& pair, double R1, double T) {
  const double p = pair.i_plus_min();  // f'(theta_bar_g) >= 0
  if (R1 <= 0.0) return T;
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return T - R1 / p;
}
}  // namespace detail

/// Backwards piecewise-linear recursion for s_xi: each segment carries the
/// chord speed against theta_bar_g and ends on the next fan ray, terminating
/// on the interface or on the theta_dbar_g ray.
/// Pre: (R1, T) in D = {0 <= R1 <= f'(theta_bar_g) T}; 0 <= xi <= xi_1.
inline XiCurve build_s_curve(const FluxPair& pair, double R1, double T, double xi, int k = 512) {
  if (k < 2) throw std::invalid_argument("build_s_curve: k >= 2 required");
  if (R1 < 0.0 || !(T > 0.0)) throw std::invalid_argument("build_s_curve: needs R1 >= 0, T > 0");
  const double alpha_bar = pair.theta_bar_g();
  const double alpha_dbar = pair.theta_dbar_g();
  const double fp_bar = pair.i_plus_min();          // f'(alpha_bar)
  const double fp_dbar = pair.f().slope(alpha_dbar);  // f'(alpha_dbar) <= 0
  const double T1 = detail::time_T1(pair, R1, T);
  if (T1 < -1e-12)
    throw infeasible_error("build_s_curve: (R1,T) outside D = {0 <= R <= f'(theta_bar_g) T}");

  XiCurve out;
  if (T1 <= 1e-12 * std::fmax(1.0, T)) {
    // T1 = 0: xi_1 = 0 and s_xi(t) = L_alpha_bar(t) = f'(alpha_bar) t.
    out.xi = 0.0;
    out.t0 = 0.0;
    out.ts = {0.0, T};
    out.xs = {0.0, fp_bar * T};
    return out;
  }
  const double xi1 = -fp_dbar * T1;
  if (xi < -1e-12 || xi > xi1 + 1e-9)
    throw std::invalid_argument("build_s_curve: xi outside [0, xi_1]");
  xi = std::fmin(std::fmax(xi, 0.0), xi1);
  out.xi = xi;

  const double beta = pair.f().inv_slope((R1 - xi) / T);
  const int m = k + 1;  // intervals; state gap (beta - alpha_dbar)/(k+1)
  const double du = (beta - alpha_dbar) / m;

  std::vector<double> rts = {T}, rxs = {R1};  // reversed (decreasing t)
  double cur_t = T, cur_x = R1;
  bool ended = false;
  for (int j = m; j >= 1 && !ended; --j) {
    const double uj = alpha_dbar + j * du;
    const double slope = pair.chord_f(alpha_bar, uj);
    const double u_prev = alpha_dbar + (j - 1) * du;
    const double fpu = pair.f().slope(u_prev);
    // intersection with the fan line l_{j-1}(t) = xi + f'(u_{j-1}) t
    const double denom = fpu - slope;
    double t_line = -1.0;
    if (denom < -1e-15) t_line = (cur_x - slope * cur_t - xi) / denom;
    // interface crossing of the current segment
    const double t_zero = slope > 1e-15 ? cur_t - cur_x / slope : -1.0;
    if (t_zero >= t_line && t_zero >= 0.0) {
      rts.push_back(t_zero);
      rxs.push_back(0.0);
      cur_t = t_zero;
      ended = true;  // terminal alternative: the curve reaches the interface
    } else if (t_line >= 0.0 && t_line < cur_t) {
      cur_x = xi + fpu * t_line;
      cur_t = t_line;
      rts.push_back(cur_t);
      rxs.push_back(cur_x);
      if (j == 1) ended = true;  // terminal alternative: ends on the theta_dbar ray
    } else {
      throw infeasible_error("build_s_curve: recursion left [0, T]; xi outside its range");
    }
  }
  out.t0 = cur_t;
  out.ts.assign(rts.rbegin(), rts.rend());
  out.xs.assign(rxs.rbegin(), rxs.rend());
  return out;
}

/// Fixed point (xi_0, tau_0) of the reflection geometry: xi_0 =
/// -f'(theta_dbar_g) tau_0 with t_0(xi_0) = tau_0, found by bisecting
/// h(xi) = -xi/f'(theta_dbar_g) - t_0(xi); it caps the admissible y(R1+).
inline FixedPoint find_fixed_point(const FluxPair& pair, double R1, double T, int k = 512) {
  const double fp_dbar = pair.f().slope(pair.theta_dbar_g());
  const double T1 = detail::time_T1(pair, R1, T);
  if (T1 < -1e-12)
    throw infeasible_error("find_fixed_point: (R1,T) outside D");

  FixedPoint fp;
  if (R1 <= 1e-14) {  // degenerate target at the interface: tau_0 = T
    fp.tau0 = T;
    fp.xi0 = -fp_dbar * T;
    fp.s.xi = fp.xi0;
    fp.s.t0 = T;
    fp.s.ts = {T, T * (1.0 + 1e-15)};
    fp.s.xs = {0.0, 0.0};
    return fp;
  }
  if (T1 <= 1e-12 * std::fmax(1.0, T)) {  // boundary of D: the curve is the theta_bar ray
    fp.xi0 = 0.0;
    fp.tau0 = 0.0;
    fp.s = build_s_curve(pair, R1, T, 0.0, k);
    return fp;
  }
  const double xi1 = -fp_dbar * T1;
  if (xi1 <= 1e-14) {  // degenerate f'(theta_dbar_g) = 0 (equality pair)
    fp.xi0 = 0.0;
    fp.s = build_s_curve(pair, R1, T, 0.0, k);
    fp.tau0 = fp.s.t0;
    return fp;
  }
  auto h = [&](double xi) { return -xi / fp_dbar - build_s_curve(pair, R1, T, xi, k).t0; };
  double lo = 0.0, hi = xi1;
  double hlo = h(lo), hhi = h(hi);
  double xi0;
  if (hlo >= -1e-8) {
    xi0 = lo;
  } else if (hhi <= 1e-8) {
    xi0 = hi;
  } else {
    xi0 = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      xi0 = 0.5 * (lo + hi);
      const double hm = h(xi0);
      if (std::fabs(hm) < 1e-9 || (hi - lo) < 1e-15 * xi1) break;
      if (hm < 0.0)
        lo = xi0;
      else
        hi = xi0;
    }
  }
  fp.s = build_s_curve(pair, R1, T, xi0, k);
  fp.xi0 = xi0;
  fp.tau0 = -xi0 / fp_dbar;
  return fp;
}

struct ReachVerdict {
  bool member = false;
  std::string reason;          // empty when member
  std::string condition;       // "1i", "1ii", "2", "3", "foot"
  std::optional<FixedPoint> fixed_point;
  explicit operator bool() const { return member; }
};

/// Membership test for the reachable set R(T): sign/monotonicity of y, the
/// reflected-characteristics constraint xi_0 <= y(R1+), the influence-cone
/// condition when R2 < R1, and the zero-foot feasibility screen.
inline ReachVerdict is_reachable(const FluxPair& pair, const TargetElement& elem) {
  elem.validate();
  ReachVerdict v;
  const double tol = 1e-12;

  // (1)(i): y <= 0 left of R2 (monotonicity makes the left limit at R2 the max)
  if (elem.R2 > 0.0 || elem.xlo < 0.0) {
    if (elem.y(elem.R2, Side::left) > tol) {
      v.reason = "y(x) > 0 for some x < R2";
      v.condition = "1i";
      return v;
    }
  }
  // (1)(ii): y >= 0 right of R1
  if (elem.y(elem.R1, Side::right) < -tol) {
    v.reason = "y(x) < 0 for some x > R1";
    v.condition = "1ii";
    return v;
  }

  const double TR1 = detail::time_T1(pair, elem.R1, elem.T);

  // (3): R2 < R1 requires T(R1) >= 0
  if (elem.R2 < elem.R1 - 1e-14 && TR1 < -1e-12) {
    v.reason = "R2 < R1 but the theta_bar_g characteristic from (R1,T) misses the interface";
    v.condition = "3";
    return v;
  }

  // zero-foot feasibility on (0, R2): a vanishing foot forces the crossing
  // characteristic to exit at slope f'(theta_bar_g), which must reach R2
  if (elem.R2 > 1e-14 && elem.y(elem.R2, Side::left) > -1e-14) {
    const double TR2 = detail::time_T1(pair, elem.R2, elem.T);
    if (TR2 < -1e-12) {
      v.reason = "y = 0 near R2- needs T - R2/f'(theta_bar_g) >= 0";
      v.condition = "foot";
      return v;
    }
  }

  // (2): when T(R1) >= 0, the reflected-characteristics constraint xi_0 <= y(R1+)
  if (TR1 >= -1e-12) {
    FixedPoint fp = find_fixed_point(pair, elem.R1, elem.T);
    const double yplus = elem.y(elem.R1, Side::right);
    if (fp.xi0 > yplus + 1e-9) {
      v.reason = "xi_0 = " + std::to_string(fp.xi0) + " exceeds y(R1+) = " + std::to_string(yplus);
      v.condition = "2";
      v.fixed_point = std::move(fp);
      return v;
    }
    v.fixed_point = std::move(fp);
  }

  v.member = true;
  return v;
}

}  // namespace dfc
