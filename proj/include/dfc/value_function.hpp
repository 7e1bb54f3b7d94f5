#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dfc/flux.hpp"
#include "dfc/profile.hpp"
#include "dfc/roots.hpp"

namespace dfc {

/// Piecewise-linear primitive v0(x) = int_0^x u0, for step-function data.
class Primitive {
 public:
  explicit Primitive(const StepFunction& u0) : bps_(u0.breakpoints), slopes_(u0.values) {
    vals_.assign(bps_.size(), 0.0);
    if (bps_.empty()) return;
    // anchor v(0) = 0
    std::size_t k0 = std::upper_bound(bps_.begin(), bps_.end(), 0.0) - bps_.begin();
    if (k0 == bps_.size()) {
      vals_.back() = (bps_.back() - 0.0) * slopes_[bps_.size()];
      for (std::size_t i = bps_.size() - 1; i-- > 0;)
        vals_[i] = vals_[i + 1] - (bps_[i + 1] - bps_[i]) * slopes_[i + 1];
    } else {
      vals_[k0] = (bps_[k0] - 0.0) * slopes_[k0];
      for (std::size_t i = k0 + 1; i < bps_.size(); ++i)
        vals_[i] = vals_[i - 1] + (bps_[i] - bps_[i - 1]) * slopes_[i];
      for (std::size_t i = k0; i-- > 0;)
        vals_[i] = vals_[i + 1] - (bps_[i + 1] - bps_[i]) * slopes_[i + 1];
    }
  }

  double operator()(double x) const {
    if (bps_.empty()) return slopes_[0] * x;
    std::size_t k = std::upper_bound(bps_.begin(), bps_.end(), x) - bps_.begin();
    if (k == 0) return vals_[0] + (x - bps_[0]) * slopes_[0];
    return vals_[k - 1] + (x - bps_[k - 1]) * slopes_[k];
  }

 private:
  std::vector<double> bps_, vals_, slopes_;
};

/// A minimizing control curve: 1 segment (class c0) or up to 3 segments with
/// the middle one pinned to the interface (classes c_b / c_r).
struct ControlCurve {
  enum class Class { c0, cb, cr };
  Class cls = Class::c0;
  int segments = 1;
  double t_node[4] = {0, 0, 0, 0};  // 0 = t0 <= t1 <= t2 <= t3 = t
  double x_node[4] = {0, 0, 0, 0};
};

struct ValueSample {
  double x = 0.0, t = 0.0;
  double v = std::numeric_limits<double>::infinity();
  ControlCurve curve;
  double v_c0 = std::numeric_limits<double>::infinity();
  double v_cb = std::numeric_limits<double>::infinity();
  double v_cr = std::numeric_limits<double>::infinity();
  /// a genuinely 3-segment same-side curve attains the minimum (minimizers
  /// are non-unique wherever reflection occurs, so this is attainment, not a
  /// strict win)
  bool reflected = false;
};

struct ValueKnobs {
  int grid = 2048;     // seed points per coordinate
  double tol = 1e-10;  // golden-section tolerance
  int sweeps = 3;      // coordinate-descent rounds for the 2-D classes
};

namespace detail {

/// f*(p) with the working interval enforced (out of range -> +inf).
inline double dual_checked(const ConvexFlux& fl, double p) {
  const double B = fl.domain_bound() * (1.0 - 1e-9);
  if (p < fl.slope(-B) || p > fl.slope(B)) return 1e300;
  return fl.legendre(p);
}

}  // namespace detail

/// Value function v(x,t) = inf over control curves of the cost Gamma, by
/// minimizing separately over the classes c0 (1-D), c_b and c_r (2-D with the
/// waiting time resolved exactly) and taking the best.
inline ValueSample value_function(const FluxPair& pair, const Primitive& v0, double x, double t,
                                  ValueKnobs knobs = {}) {
  if (!(t > 0.0)) throw std::invalid_argument("value_function: t > 0 required");
  ValueSample out;
  out.x = x;
  out.t = t;
  const ConvexFlux& F = pair.f();
  const ConvexFlux& G = pair.g();
  const double mstar = std::fmin(-F.min_value(), -G.min_value());  // min{f*(0), g*(0)}
  const double Bf = F.domain_bound() * (1.0 - 1e-6), Bg = G.domain_bound() * (1.0 - 1e-6);
  const bool right = x > 0.0;
  const ConvexFlux& N = right ? F : G;  // near-side flux
  const ConvexFlux& A = right ? G : F;  // across-side flux
  const double Bn = right ? Bf : Bg, Ba = right ? Bg : Bf;

  // ---- class c0: single segment, foot on the same side
  {
    double lo = x - t * N.slope(Bn), hi = x - t * N.slope(-Bn);
    if (lo > hi) std::swap(lo, hi);
    if (right)
      lo = std::fmax(lo, 0.0);
    else
      hi = std::fmin(hi, 0.0);
    auto cost = [&](double rho) { return v0(rho) + t * detail::dual_checked(N, (x - rho) / t); };
    auto [rho, val] = grid_golden_min(cost, lo, hi, knobs.grid, knobs.tol);
    out.v_c0 = val;
    out.curve.cls = ControlCurve::Class::c0;
    out.curve.segments = 1;
    out.curve.t_node[0] = 0.0;
    out.curve.x_node[0] = rho;
    out.curve.t_node[1] = t;
    out.curve.x_node[1] = x;
    out.v = val;
  }

  // waiting-time rule: minimize (t2-t1)*mstar + (t-t2) n*(x/(t-t2)) over t2
  auto exit_cost = [&](double t1) {
    double t2 = t1;
    if (right) {
      const double pbar = pair.i_plus_min();
      if (pbar > 0.0) t2 = std::fmin(std::fmax(t - x / pbar, t1), t);
    }
    const double tail = t - t2;
    const double exit_v =
        tail > 1e-14 ? tail * detail::dual_checked(N, x / tail) : (std::fabs(x) > 1e-12 ? 1e300 : 0.0);
    return std::pair<double, double>(t2, (t2 - t1) * mstar + exit_v);
  };

  // ---- class c_b: crossing curves, foot on the far side
  {
    auto cost_b = [&](double rho, double t1) {
      if (t1 <= 1e-13) {
        if (std::fabs(rho) > 1e-12) return 1e300;
        return v0(0.0) + exit_cost(0.0).second;
      }
      return v0(rho) + t1 * detail::dual_checked(A, -rho / t1) + exit_cost(t1).second;
    };
    double rho_lo = right ? -t * A.slope(Ba) : 0.0;
    double rho_hi = right ? 0.0 : -t * A.slope(-Ba);
    if (rho_lo > rho_hi) std::swap(rho_lo, rho_hi);
    // coarse joint seed, then alternating golden refinement
    double rho = 0.5 * (rho_lo + rho_hi), t1 = 0.5 * t, best = 1e300;
    const int g2 = 72;
    for (int i = 0; i <= g2; ++i)
      for (int j = 1; j < g2; ++j) {
        const double r = rho_lo + (rho_hi - rho_lo) * i / g2;
        const double q = t * j / g2;
        const double v = cost_b(r, q);
        if (v < best) {
          best = v;
          rho = r;
          t1 = q;
        }
      }
    for (int s = 0; s < knobs.sweeps; ++s) {
      auto [r, vr] = grid_golden_min([&](double q) { return cost_b(q, t1); }, rho_lo, rho_hi,
                                     knobs.grid, knobs.tol);
      if (vr <= best) {
        rho = r;
        best = vr;
      }
      auto [t1n, vt] = grid_golden_min([&](double q) { return cost_b(rho, q); }, 0.0,
                                       t * (1.0 - 1e-12), knobs.grid, knobs.tol);
      if (vt <= best) {
        t1 = t1n;
        best = vt;
      }
    }
    auto boxed_b = [&](double r, double q) {
      if (r < rho_lo || r > rho_hi || q <= 0.0 || q >= t) return 1e300;
      return cost_b(r, q);
    };
    nelder_mead_2d(boxed_b, rho, t1, best, 1e-3 * (1.0 + std::fabs(rho)), 1e-3 * t);
    out.v_cb = best;
    if (best < out.v) {
      out.v = best;
      const double t2 = exit_cost(t1).first;
      out.curve.cls = ControlCurve::Class::cb;
      out.curve.segments = 3;
      out.curve.t_node[0] = 0.0;
      out.curve.x_node[0] = rho;
      out.curve.t_node[1] = t1;
      out.curve.x_node[1] = 0.0;
      out.curve.t_node[2] = t2;
      out.curve.x_node[2] = 0.0;
      out.curve.t_node[3] = t;
      out.curve.x_node[3] = x;
    }
  }

  // ---- class c_r: reflected curves, genuinely 3-segment with the foot on
  // the same side (only meaningful on the right under f(theta_f) <= g(theta_g))
  {
    const double rho_eps = 1e-6 * (1.0 + std::fabs(x));
    auto cost_r = [&](double rho, double t1) {
      if (t1 <= 1e-13) return 1e300;
      return v0(rho) + t1 * detail::dual_checked(N, -rho / t1) + exit_cost(t1).second;
    };
    double rho_lo = right ? rho_eps : -t * N.slope(Bn);
    double rho_hi = right ? -t * N.slope(-Bn) : -rho_eps;
    if (rho_lo > rho_hi) std::swap(rho_lo, rho_hi);
    double rho = 0.5 * (rho_lo + rho_hi), t1 = 0.5 * t, best = 1e300;
    const int g2 = 72;
    for (int i = 0; i <= g2; ++i)
      for (int j = 1; j < g2; ++j) {
        const double r = rho_lo + (rho_hi - rho_lo) * i / g2;
        const double q = t * j / g2;
        const double v = cost_r(r, q);
        if (v < best) {
          best = v;
          rho = r;
          t1 = q;
        }
      }
    for (int s = 0; s < knobs.sweeps; ++s) {
      auto [r, vr] = grid_golden_min([&](double q) { return cost_r(q, t1); }, rho_lo, rho_hi,
                                     knobs.grid, knobs.tol);
      if (vr <= best) {
        rho = r;
        best = vr;
      }
      auto [t1n, vt] = grid_golden_min([&](double q) { return cost_r(rho, q); }, 1e-12,
                                       t * (1.0 - 1e-12), knobs.grid, knobs.tol);
      if (vt <= best) {
        t1 = t1n;
        best = vt;
      }
    }
    auto boxed_r = [&](double r, double q) {
      if (r < rho_lo || r > rho_hi || q <= 0.0 || q >= t) return 1e300;
      return cost_r(r, q);
    };
    nelder_mead_2d(boxed_r, rho, t1, best, 1e-3 * (1.0 + std::fabs(rho)), 1e-3 * t);
    out.v_cr = best;
    const double t2 = exit_cost(t1).first;
    const bool genuine = t1 > 1e-9 && t2 > t1 + 1e-9 && t2 < t * (1.0 - 1e-9);
    out.reflected = genuine && best <= out.v + 1e-9;
    if (best < out.v) out.v = best;
    if (out.reflected) {
      out.curve.cls = ControlCurve::Class::cr;
      out.curve.segments = 3;
      out.curve.t_node[0] = 0.0;
      out.curve.x_node[0] = rho;
      out.curve.t_node[1] = t1;
      out.curve.x_node[1] = 0.0;
      out.curve.t_node[2] = t2;
      out.curve.x_node[2] = 0.0;
      out.curve.t_node[3] = t;
      out.curve.x_node[3] = x;
    }
  }
  return out;
}

/// u = dv/dx by centered differencing of the value function.
inline double value_gradient(const FluxPair& pair, const Primitive& v0, double x, double t,
                             double h = 1e-4, ValueKnobs knobs = {}) {
  const double vl = value_function(pair, v0, x - h, t, knobs).v;
  const double vr = value_function(pair, v0, x + h, t, knobs).v;
  return (vr - vl) / (2.0 * h);
}

}  // namespace dfc
