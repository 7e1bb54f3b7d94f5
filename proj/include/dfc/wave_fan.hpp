#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfc/errors.hpp"
#include "dfc/flux.hpp"
#include "dfc/profile.hpp"

namespace dfc {

/// Region-boundary curve: piecewise-linear x(t) on [0, T], optionally clamped
/// to one side of the interface (the displays' max{.,0} / min{.,0}).
struct Curve {
  enum class Clamp { none, floor_zero /* x = max(x,0) */, cap_zero /* x = min(x,0) */ };

  std::vector<double> ts, xs;  // nodes, ts strictly increasing, spanning [0, T]
  Clamp clamp = Clamp::none;

  double x_at(double t) const {
    double x;
    if (t <= ts.front()) {
      x = xs.front();
    } else if (t >= ts.back()) {
      x = xs.back();
    } else {
      auto it = std::upper_bound(ts.begin(), ts.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - ts.begin());
      const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
      x = xs[i - 1] + w * (xs[i] - xs[i - 1]);
    }
    if (clamp == Clamp::floor_zero) return std::fmax(x, 0.0);
    if (clamp == Clamp::cap_zero) return std::fmin(x, 0.0);
    return x;
  }

  static Curve through(double t0, double x0, double t1, double x1, double T,
                       Clamp cl = Clamp::none) {
    // extend the segment linearly over [0, T]
    const double slope = (x1 - x0) / (t1 - t0);
    Curve c;
    c.ts = {0.0, T};
    c.xs = {x0 - slope * t0, x0 + slope * (T - t0)};
    c.clamp = cl;
    return c;
  }

  static Curve point_slope(double t0, double x0, double slope, double T,
                           Clamp cl = Clamp::none) {
    Curve c;
    c.ts = {0.0, T};
    c.xs = {x0 - slope * t0, x0 + slope * (T - t0)};
    c.clamp = cl;
    return c;
  }

  static Curve vertical(double x, double T) {
    Curve c;
    c.ts = {0.0, T};
    c.xs = {x, x};
    return c;
  }

  static Curve wall(double sign, double T) { return vertical(sign * 1e300, T); }

  static Curve polyline(std::vector<double> ts, std::vector<double> xs,
                        Clamp cl = Clamp::none) {
    Curve c;
    c.ts = std::move(ts);
    c.xs = std::move(xs);
    c.clamp = cl;
    return c;
  }
};

/// One tile of the solution between two curves.
struct Region {
  enum class Kind {
    constant,  // u = value
    fan,       // u = (side')^{-1}((x - cx)/(t - ct)); focusing waves use ct = T
    graded     // u = (f')^{-1}(x/(t - s)), h_+(x/(t-s)) = -foot/s  (interface-crossed)
  };

  Kind kind = Kind::constant;
  char side = 'f';  // 'f' (x>0) or 'g' (x<0)
  double value = 0.0;
  double cx = 0.0, ct = 0.0;  // fan center
  double foot = 0.0;          // graded foot z <= 0
  std::string label;

  double eval(const FluxPair& pair, double x, double t) const {
    switch (kind) {
      case Kind::constant:
        return value;
      case Kind::fan: {
        const ConvexFlux& fl = side == 'f' ? pair.f() : pair.g();
        return fl.inv_slope((x - cx) / (t - ct));
      }
      case Kind::graded: {
        if (x <= 0.0) return pair.f().inv_slope(pair.h_plus_inv(-foot / t));
        const double s = pair.solve_t_plus(x, foot, t);
        return pair.f().inv_slope(x / (t - s));
      }
    }
    return value;
  }

  /// Value at the interface x = 0 (one-sided limit from inside the region).
  double interface_value(const FluxPair& pair, double t) const {
    switch (kind) {
      case Kind::constant:
        return value;
      case Kind::fan: {
        const ConvexFlux& fl = side == 'f' ? pair.f() : pair.g();
        return fl.inv_slope((0.0 - cx) / (t - ct));
      }
      case Kind::graded:
        return pair.f().inv_slope(pair.h_plus_inv(-foot / t));
    }
    return value;
  }

  static Region constant_state(double v, char side, std::string label = {}) {
    Region r;
    r.kind = Kind::constant;
    r.value = v;
    r.side = side;
    r.label = std::move(label);
    return r;
  }
  static Region fan_wave(double cx, double ct, char side, std::string label = {}) {
    Region r;
    r.kind = Kind::fan;
    r.cx = cx;
    r.ct = ct;
    r.side = side;
    r.label = std::move(label);
    return r;
  }
  static Region graded_wave(double foot, std::string label = {}) {
    Region r;
    r.kind = Kind::graded;
    r.foot = foot;
    r.side = 'f';
    r.label = std::move(label);
    return r;
  }
};

/// Region content of the strip between two adjacent curves, possibly varying
/// over time sub-intervals (Case 1's theta_dbar/theta_bar stack).
struct Strip {
  std::vector<double> t_splits;  // interior split times, increasing
  std::vector<Region> regions;   // size = t_splits.size() + 1

  Strip() = default;
  explicit Strip(Region r) : regions{std::move(r)} {}
  Strip(Region below, double t_split, Region above)
      : t_splits{t_split}, regions{std::move(below), std::move(above)} {}

  const Region& at(double t) const {
    std::size_t i = std::upper_bound(t_splits.begin(), t_splits.end(), t) - t_splits.begin();
    return regions[i];
  }
};

/// Ordered left-to-right assembly of curves and strips; builders produce these
/// and realize_target concatenates them.
struct FanAssembly {
  std::vector<Curve> curves;
  std::vector<Strip> strips;
  std::map<std::string, std::size_t> names;

  void start(Curve c, const std::string& name = {}) {
    curves.clear();
    strips.clear();
    curves.push_back(std::move(c));
    if (!name.empty()) names[name] = curves.size() - 1;
  }
  void add(Strip s, Curve next, const std::string& name = {}) {
    strips.push_back(std::move(s));
    curves.push_back(std::move(next));
    if (!name.empty()) names[name] = curves.size() - 1;
  }
  void add(Region r, Curve next, const std::string& name = {}) {
    add(Strip(std::move(r)), std::move(next), name);
  }

  /// Append another assembly whose first curve coincides with our last one
  /// (the shared boundary is kept once).
  void append(const FanAssembly& other) {
    const std::size_t base = curves.size() - 1;
    for (std::size_t i = 0; i < other.strips.size(); ++i) {
      strips.push_back(other.strips[i]);
      curves.push_back(other.curves[i + 1]);
    }
    for (const auto& [k, v] : other.names)
      if (v > 0) names[k] = base + v;
  }
};

/// Region-decomposed exact entropy solution on R x (0, T].
class WaveFan {
 public:
  WaveFan(FluxPair pair, double T, FanAssembly a, double r1_at_T, double r2_at_T)
      : pair_(std::move(pair)),
        T_(T),
        curves_(std::move(a.curves)),
        strips_(std::move(a.strips)),
        names_(std::move(a.names)),
        r1_(r1_at_T),
        r2_(r2_at_T) {
    interface_idx_ = 0;
    for (std::size_t i = 0; i < curves_.size(); ++i) {
      const Curve& c = curves_[i];
      if (c.ts.size() == 2 && c.xs[0] == 0.0 && c.xs[1] == 0.0 && c.clamp == Curve::Clamp::none) {
        interface_idx_ = i;
        break;
      }
    }
  }

  double T() const { return T_; }
  const FluxPair& pair() const { return pair_; }
  double r1_at_T() const { return r1_; }
  double r2_at_T() const { return r2_; }
  std::size_t strip_count() const { return strips_.size(); }
  const std::vector<Curve>& curves() const { return curves_; }
  const std::vector<Strip>& strips() const { return strips_; }
  const std::map<std::string, std::size_t>& curve_names() const { return names_; }
  const Curve* named_curve(const std::string& name) const {
    auto it = names_.find(name);
    return it == names_.end() ? nullptr : &curves_[it->second];
  }

  std::size_t strip_index_at(double x, double t) const {
    check_time(t);
    // first curve strictly right of x; on-curve queries take the right limit
    std::size_t lo = 0, hi = curves_.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (curves_[mid].x_at(t) <= x)
        lo = mid + 1;
      else
        hi = mid;
    }
    if (lo == 0 || lo == curves_.size())
      throw std::out_of_range("wave fan: point outside covered region (malformed fan)");
    return lo - 1;
  }

  const Region& region_at(double x, double t) const {
    return strips_[strip_index_at(x, t)].at(t);
  }

  /// u(x, t). On-curve queries take the right limit.
  double eval(double x, double t) const { return region_at(x, t).eval(pair_, x, t); }

  /// One-sided interface trace u(0-, t) / u(0+, t).
  double trace(Side s, double t) const {
    check_time(t);
    const double eps = 1e-13;
    if (s == Side::right) {
      for (std::size_t j = interface_idx_; j + 1 < curves_.size(); ++j)
        if (curves_[j + 1].x_at(t) > eps) return strips_[j].at(t).interface_value(pair_, t);
    } else {
      for (std::size_t j = interface_idx_; j-- > 0;)
        if (curves_[j].x_at(t) < -eps) return strips_[j].at(t).interface_value(pair_, t);
    }
    throw std::out_of_range("wave fan: no positive-width region at the interface");
  }

  /// |f(u(0+,t)) - g(u(0-,t))|, the interface Rankine-Hugoniot residual.
  double rh_residual(double t) const {
    return std::fabs(pair_.f().value(trace(Side::right, t)) -
                     pair_.g().value(trace(Side::left, t)));
  }

  /// Interface entropy condition at one time: NOT (f'(u(0+)) > 0 and g'(u(0-)) < 0).
  bool entropy_ok(double t) const {
    return !(pair_.f().slope(trace(Side::right, t)) > 1e-12 &&
             pair_.g().slope(trace(Side::left, t)) < -1e-12);
  }

  /// t_+(x, T) read off the fan for x in (0, R2(T)).
  double t_plus_at_T(double x) const {
    const Region& r = region_at(x, T_ * (1.0 - 1e-14));
    if (r.kind == Region::Kind::graded) return pair_.solve_t_plus(x, r.foot, T_);
    if (r.kind == Region::Kind::constant) {
      // transferred constant wedge: t where its left characteristic leaves x=0
      const double p = pair_.f().slope(r.value);
      if (p > 0.0) return T_ - x / p;
    }
    throw std::out_of_range("t_plus: x not inside an interface-crossed region");
  }

  /// y(x, T) backtraced through the fan in the classical regions.
  double y_at_T(double x) const {
    const double t = T_ * (1.0 - 1e-14);
    const Region& r = region_at(x, t);
    const ConvexFlux& fl = x >= 0.0 ? pair_.f() : pair_.g();
    return x - fl.slope(r.eval(pair_, x, t)) * T_;
  }

  /// Restriction to [0, T'] (regions and curves are unchanged).
  WaveFan restricted(double new_T) const {
    WaveFan w = *this;
    if (new_T <= 0.0 || new_T > T_) throw std::invalid_argument("restricted: need 0 < T' <= T");
    w.T_ = new_T;
    return w;
  }

 private:
  void check_time(double t) const {
    if (!(t > 0.0) || t > T_ * (1.0 + 1e-12))
      throw std::out_of_range("wave fan: time outside (0, T]");
  }

  FluxPair pair_;
  double T_;
  std::vector<Curve> curves_;
  std::vector<Strip> strips_;
  std::map<std::string, std::size_t> names_;
  std::size_t interface_idx_;
  double r1_ = 0.0, r2_ = 0.0;
};

/// (x, u) samples of a fan at fixed time on a uniform grid.
inline std::vector<std::pair<double, double>> sample_fan(const WaveFan& w, double t, double xlo,
                                                         double xhi, int n) {
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double x = xlo + (xhi - xlo) * (i + 0.5) / n;
    out.emplace_back(x, w.eval(x, t));
  }
  return out;
}

inline double eval_fan(const WaveFan& w, double x, double t) { return w.eval(x, t); }

}  // namespace dfc
