#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dfc {

enum class Side { left, right };

/// Piecewise-constant function with the left-closed right-open convention:
/// values[i] on [breakpoints[i-1], breakpoints[i]).
struct StepFunction {
  std::vector<double> breakpoints;  // strictly increasing
  std::vector<double> values;       // size = breakpoints.size() + 1

  static StepFunction constant(double v) { return {{}, {v}}; }

  double operator()(double x) const { return eval(x, Side::right); }

  double eval(double x, Side side) const {
    auto it = side == Side::right ? std::upper_bound(breakpoints.begin(), breakpoints.end(), x)
                                  : std::lower_bound(breakpoints.begin(), breakpoints.end(), x);
    return values[static_cast<std::size_t>(it - breakpoints.begin())];
  }

  std::size_t piece_count() const { return values.size(); }

  void check_shape() const {
    if (values.size() != breakpoints.size() + 1)
      throw std::invalid_argument("step function: need len(values) == len(breakpoints)+1");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1]))
        throw std::invalid_argument("step function: breakpoints must be strictly increasing");
  }

  /// Append a piece ending the previous one at x (x must exceed the last breakpoint).
  void push_piece(double x_end_of_previous, double new_value) {
    if (!breakpoints.empty() && x_end_of_previous <= breakpoints.back() + 1e-15) {
      // zero-width piece; overwrite the value instead
      if (x_end_of_previous <= breakpoints.back()) {
        values.back() = new_value;
        return;
      }
    }
    breakpoints.push_back(x_end_of_previous);
    values.push_back(new_value);
  }

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }
};

/// Non-decreasing step function (the admissible shape for backtraces y(.)).
struct MonotoneProfile : StepFunction {
  MonotoneProfile() = default;
  MonotoneProfile(std::vector<double> bps, std::vector<double> vals) {
    breakpoints = std::move(bps);
    values = std::move(vals);
  }
  static MonotoneProfile constant(double v) { return MonotoneProfile({}, {v}); }

  void validate() const {
    check_shape();
    for (std::size_t i = 1; i < values.size(); ++i)
      if (values[i] < values[i - 1])
        throw std::invalid_argument("monotone profile: values must be non-decreasing");
  }
};

inline double eval_profile(const MonotoneProfile& p, double x, Side side) {
  return p.eval(x, side);
}

/// Candidate element (T, R1, R2, y(.)) of the reachable set. y is stored as a
/// monotone step profile on the window [xlo, xhi] with y(x) = x outside, so
/// sup|x - y(x)| is finite by construction. y is meaningful off [R2, R1].
struct TargetElement {
  double T = 1.0;
  double R1 = 0.0;
  double R2 = 0.0;
  double xlo = 0.0;  // y(x) = x for x < xlo
  double xhi = 0.0;  // y(x) = x for x > xhi
  MonotoneProfile y_inner;

  double y(double x, Side side) const {
    if (x < xlo || (x == xlo && side == Side::left)) return x;
    if (x > xhi || (x == xhi && side == Side::right)) return x;
    return y_inner.eval(x, side);
  }

  /// Structural invariants of the type (not membership conditions).
  void validate() const {
    if (!(T > 0.0)) throw std::invalid_argument("target: T must be positive");
    if (R1 < 0.0 || R2 < 0.0 || R2 > R1 + 1e-15)
      throw std::invalid_argument("target: needs 0 <= R2 <= R1");
    if (xhi < xlo) throw std::invalid_argument("target: window [xlo, xhi] inverted");
    y_inner.validate();
    // global monotonicity across the identity tails
    if (!y_inner.values.empty()) {
      if (y_inner.values.front() < xlo - 1e-12)
        throw std::invalid_argument("target: y(xlo+) < xlo breaks monotonicity at the left tail");
      if (y_inner.values.back() > xhi + 1e-12)
        throw std::invalid_argument("target: y(xhi-) > xhi breaks monotonicity at the right tail");
    }
  }

  double sup_displacement() const {
    double s = 0.0;
    for (std::size_t i = 0; i < y_inner.values.size(); ++i) {
      const double lo = i == 0 ? xlo : y_inner.breakpoints[i - 1];
      const double hi = i == y_inner.breakpoints.size() ? xhi : y_inner.breakpoints[i];
      s = std::fmax(s, std::fmax(std::fabs(lo - y_inner.values[i]),
                                 std::fabs(hi - y_inner.values[i])));
    }
    return s;
  }
};

}  // namespace dfc
