#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dfc/errors.hpp"
#include "dfc/roots.hpp"

namespace dfc {

enum class Branch { minus, plus };

namespace detail {

/// a*(u-b)^2 + c with a > 0. Admits closed-form inverses.
struct QuadraticCoef {
  double a, b, c;
};

inline double poly_eval(const std::vector<double>& coef, double u) {
  double r = 0.0;
  for (std::size_t i = coef.size(); i-- > 0;) r = r * u + coef[i];
  return r;
}

}  // namespace detail

/// One strictly convex C^1 flux: evaluation, derivative, its minimizer and a
/// finite working interval [-domain_bound, domain_bound] inside which every
/// inversion is performed. Quadratic fluxes carry closed-form inverses; the
/// generic path falls back to bisection (monotone, tol 1e-12, <=200 iters).
class ConvexFlux {
 public:
  using Fn = std::function<double(double)>;

  static ConvexFlux quadratic(double a, double b, double c, double domain_bound = 10.0) {
    if (!(a > 0.0)) throw std::invalid_argument("quadratic flux needs a > 0");
    ConvexFlux fl;
    fl.quad_ = detail::QuadraticCoef{a, b, c};
    fl.argmin_ = b;
    fl.domain_bound_ = domain_bound;
    fl.eval_ = [a, b, c](double u) { return a * (u - b) * (u - b) + c; };
    fl.deriv_ = [a, b](double u) { return 2.0 * a * (u - b); };
    return fl;
  }

  /// coef[k] multiplies u^k. Convexity is the caller's contract; validate()
  /// checks it by sampling.
  static ConvexFlux polynomial(std::vector<double> coef, double domain_bound = 10.0) {
    if (coef.size() < 3) throw std::invalid_argument("polynomial flux needs degree >= 2");
    if (coef.size() == 3 && coef[2] > 0.0) {
      // a u^2 + b u + c == a (u + b/2a)^2 + (c - b^2/4a)
      const double a = coef[2], b = coef[1], c = coef[0];
      return quadratic(a, -b / (2.0 * a), c - b * b / (4.0 * a), domain_bound);
    }
    std::vector<double> dcoef(coef.size() - 1);
    for (std::size_t k = 1; k < coef.size(); ++k) dcoef[k - 1] = k * coef[k];
    ConvexFlux fl;
    fl.domain_bound_ = domain_bound;
    fl.eval_ = [coef](double u) { return detail::poly_eval(coef, u); };
    fl.deriv_ = [dcoef](double u) { return detail::poly_eval(dcoef, u); };
    fl.argmin_ = bisect_increasing(fl.deriv_, -domain_bound, domain_bound, {1e-14, 200});
    return fl;
  }

  static ConvexFlux custom(Fn eval, Fn deriv, double argmin, double domain_bound = 10.0) {
    ConvexFlux fl;
    fl.eval_ = std::move(eval);
    fl.deriv_ = std::move(deriv);
    fl.argmin_ = argmin;
    fl.domain_bound_ = domain_bound;
    return fl;
  }

  double value(double u) const { return eval_(u); }
  double slope(double u) const { return deriv_(u); }
  double argmin() const { return argmin_; }
  double min_value() const { return eval_(argmin_); }
  double domain_bound() const { return domain_bound_; }
  const detail::QuadraticCoef* as_quadratic() const { return quad_ ? &*quad_ : nullptr; }

  /// (f')^{-1}(p), the derivative of the Legendre dual.
  double inv_slope(double p) const {
    if (quad_) return quad_->b + p / (2.0 * quad_->a);
    const double lo = -domain_bound_, hi = domain_bound_;
    if (p < deriv_(lo) - 1e-9 || p > deriv_(hi) + 1e-9)
      throw std::out_of_range("inv_slope: p=" + std::to_string(p) + " outside [f'(" +
                              std::to_string(lo) + "), f'(" + std::to_string(hi) + ")] = [" +
                              std::to_string(deriv_(lo)) + ", " + std::to_string(deriv_(hi)) + "]");
    return bisect_increasing([&](double u) { return deriv_(u) - p; }, lo, hi, {1e-12, 200});
  }

  /// u with eval(u) = v on the chosen side of the minimizer.
  double branch_inverse(double v, Branch br) const {
    const double fmin = min_value();
    if (v < fmin - 1e-12)
      throw infeasible_error("branch_inverse: value " + std::to_string(v) +
                             " below flux minimum " + std::to_string(fmin));
    if (v <= fmin) return argmin_;
    if (quad_) {
      const double r = std::sqrt((v - quad_->c) / quad_->a);
      return br == Branch::plus ? quad_->b + r : quad_->b - r;
    }
    const double lo = br == Branch::plus ? argmin_ : -domain_bound_;
    const double hi = br == Branch::plus ? domain_bound_ : argmin_;
    if (v > eval_(br == Branch::plus ? hi : lo) + 1e-12)
      throw saturation_error("branch_inverse: value exceeds flux range on the working interval; "
                             "increase domain_bound");
    const double sgn = br == Branch::plus ? 1.0 : -1.0;
    return bisect_increasing([&](double u) { return sgn * (eval_(u) - v); }, lo, hi, {1e-12, 200});
  }

  /// Legendre dual f*(p) = sup_q { p q - f(q) } = p q* - f(q*), f'(q*) = p.
  double legendre(double p) const {
    const double q = inv_slope(p);
    return p * q - eval_(q);
  }

  /// Sampled invariant check: f' strictly increasing, f'(argmin)=0, min at argmin.
  void validate(int samples = 128) const {
    if (std::fabs(deriv_(argmin_)) > 1e-10)
      throw std::invalid_argument("flux: deriv(argmin) != 0 (got " +
                                  std::to_string(deriv_(argmin_)) + ")");
    const double fmin = min_value();
    double prev = deriv_(-domain_bound_);
    for (int i = 1; i <= samples; ++i) {
      const double u = -domain_bound_ + 2.0 * domain_bound_ * i / samples;
      const double d = deriv_(u);
      if (!(d > prev)) throw std::invalid_argument("flux: derivative not strictly increasing");
      if (eval_(u) < fmin - 1e-12) throw std::invalid_argument("flux: minimum not at argmin");
      prev = d;
    }
  }

 private:
  ConvexFlux() = default;
  Fn eval_, deriv_;
  double argmin_ = 0.0;
  double domain_bound_ = 10.0;
  std::optional<detail::QuadraticCoef> quad_;
};

/// Secant slope (f(a)-f(b))/(a-b), falling back to f'(a) when a ~ b.
inline double chord(const ConvexFlux& fl, double a, double b) {
  if (std::fabs(a - b) < 1e-13) return fl.slope(0.5 * (a + b));
  return (fl.value(a) - fl.value(b)) / (a - b);
}

/// The (f,g) interface system: f on x>0, g on x<0, standing assumption
/// f(theta_f) <= g(theta_g). Carries theta_bar_g / theta_dbar_g (the two
/// preimages of g(theta_g) under f) and the transfer map h_+.
class FluxPair {
 public:
  FluxPair(ConvexFlux f, ConvexFlux g) : f_(std::move(f)), g_(std::move(g)) {
    if (f_.min_value() > g_.min_value() + 1e-12)
      throw std::invalid_argument("flux pair: requires f(theta_f) <= g(theta_g)");
    theta_bar_ = f_.branch_inverse(g_.min_value(), Branch::plus);
    theta_dbar_ = f_.branch_inverse(g_.min_value(), Branch::minus);
    // Largest admissible h_+ argument inside both working intervals.
    const double pf = f_.slope(f_.domain_bound() * (1.0 - 1e-9));
    double pg = pf;
    const double g_top = g_.value(g_.domain_bound() * (1.0 - 1e-9));
    if (f_.value(f_.inv_slope(pf)) > g_top)
      pg = f_.slope(f_.branch_inverse(g_top, Branch::plus));
    p_max_ = std::fmin(pf, pg);
  }

  const ConvexFlux& f() const { return f_; }
  const ConvexFlux& g() const { return g_; }
  double theta_f() const { return f_.argmin(); }
  double theta_g() const { return g_.argmin(); }
  double theta_bar_g() const { return theta_bar_; }
  double theta_dbar_g() const { return theta_dbar_; }
  /// Left endpoint of I_+ = [f'(theta_bar_g), inf).
  double i_plus_min() const { return f_.slope(theta_bar_); }
  /// Largest h_+ argument representable inside the working intervals.
  double p_max() const { return p_max_; }

  /// h_+(p) = g' ( g_+^{-1} ( f ( (f')^{-1}(p) ) ) ), increasing on I_+.
  /// Arguments within one part in 1e-9 of the left endpoint are clamped (the
  /// endpoint itself arises from cancellation-heavy expressions like x/(T-t)).
  double h_plus(double p) const {
    const double p0 = i_plus_min();
    if (p < p0 - 1e-9 * (1.0 + std::fabs(p0)))
      throw std::domain_error("h_plus: p=" + std::to_string(p) + " below f'(theta_bar_g)=" +
                              std::to_string(p0));
    if (p < p0) p = p0;
    if (p > p_max_ + 1e-9)
      throw saturation_error("h_plus: p exceeds the working interval; increase domain_bound");
    const double u = f_.inv_slope(p);
    const double b = g_.branch_inverse(f_.value(u), Branch::plus);
    return g_.slope(b);
  }

  /// Inverse of h_+ on [0, h_+(p_max)], by bisection.
  double h_plus_inv(double q) const {
    if (q < -1e-12) throw std::domain_error("h_plus_inv: q must be >= 0");
    if (q <= 0.0) return i_plus_min();
    if (q > h_plus(p_max_) + 1e-9)
      throw saturation_error("h_plus_inv: q exceeds the working interval");
    return bisect_increasing([&](double p) { return h_plus(p) - q; }, i_plus_min(), p_max_,
                             {1e-12, 200});
  }

  /// t_+ in [max{0, T - x/f'(theta_bar_g)}, T] solving
  /// h_+( x/(T-t) ) = -rho/t   (rho <= 0, x >= 0).
  /// For rho = 0 returns exactly T - x/f'(theta_bar_g) (requires it >= 0).
  double solve_t_plus(double x, double rho, double T) const {
    if (x < 0.0 || rho > 0.0) throw std::invalid_argument("solve_t_plus: needs x >= 0, rho <= 0");
    if (!(T > 0.0)) throw std::invalid_argument("solve_t_plus: needs T > 0");
    const double p0 = i_plus_min();
    if (x == 0.0) return T;  // the crossing time degenerates to T at x = 0+
    if (rho == 0.0) {
      const double t = p0 > 0.0 ? T - x / p0 : -1.0;
      if (t < -1e-9)
        throw infeasible_error("solve_t_plus: rho=0 requires T - x/f'(theta_bar_g) >= 0");
      return std::fmax(t, 0.0);
    }
    const double t_lo = p0 > 0.0 ? std::fmax(0.0, T - x / p0) : 0.0;
    const double t_hi = T - x / p_max_;
    if (t_hi <= t_lo)
      throw saturation_error("solve_t_plus: no admissible interval inside domain_bound");
    auto F = [&](double t) {
      if (t <= 0.0) return -1e300;
      return h_plus(std::fmax(x / (T - t), p0)) + rho / t;
    };
    if (F(t_hi) < 0.0)
      throw saturation_error("solve_t_plus: |rho|/t exceeds h_+ range; increase domain_bound");
    return bisect_increasing(F, t_lo, t_hi, {1e-10, 200});
  }

  double chord_f(double a, double b) const { return chord(f_, a, b); }
  double chord_g(double a, double b) const { return chord(g_, a, b); }

 private:
  ConvexFlux f_, g_;
  double theta_bar_ = 0.0, theta_dbar_ = 0.0, p_max_ = 0.0;
};

// Free-function forms of the core operations.

/// f*(p): Legendre dual of a convex flux.
inline double legendre_dual(const ConvexFlux& fl, double p) { return fl.legendre(p); }

/// u with flux(u) = value on the requested side of the minimizer.
inline double branch_inverse(const ConvexFlux& fl, double value, Branch br) {
  return fl.branch_inverse(value, br);
}

inline double h_plus(const FluxPair& pair, double p) { return pair.h_plus(p); }

inline double solve_t_plus(const FluxPair& pair, double x, double rho, double T) {
  return pair.solve_t_plus(x, rho, T);
}

/// The pair used throughout the examples: f = u^2/2, g = u^2/2 + shift.
inline FluxPair burgers_shifted(double shift = 1.0, double domain_bound = 10.0) {
  return FluxPair(ConvexFlux::quadratic(0.5, 0.0, 0.0, domain_bound),
                  ConvexFlux::quadratic(0.5, 0.0, shift, domain_bound));
}

}  // namespace dfc
