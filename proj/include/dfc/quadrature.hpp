#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace dfc {

namespace detail {
template <class F>
double simpson_rec(F&& fn, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = fn(lm), frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_rec(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature with absolute tolerance.
template <class F>
double integrate(F&& fn, double a, double b, double abs_tol = 1e-8, int max_depth = 28) {
  if (!(b > a)) return 0.0;
  const double fa = fn(a), fb = fn(b), fm = fn(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_rec(fn, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

/// Adaptive Simpson split at interior knots first.
template <class F>
double integrate_split(F&& fn, double a, double b, std::vector<double> knots,
                       double abs_tol = 1e-8) {
  if (!(b > a)) return 0.0;
  knots.push_back(a);
  knots.push_back(b);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end(),
                          [](double p, double q) { return std::fabs(p - q) < 1e-14; }),
              knots.end());
  double s = 0.0;
  double prev = a;
  for (double k : knots) {
    if (k <= a || k > b) continue;
    if (k - prev > 1e-14) s += integrate(fn, prev, k, abs_tol * (k - prev) / (b - a));
    prev = k;
  }
  if (b - prev > 1e-14) s += integrate(fn, prev, b, abs_tol);
  return s;
}

}  // namespace dfc
