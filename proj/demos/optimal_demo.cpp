// Minimizes the terminal-matching cost for a zero slope target and prints the
// optimizer trace.
#include <cstdio>

#include "dfc/optimal.hpp"

int main() {
  auto pair = dfc::burgers_shifted();
  const double T = 2.0;

  dfc::TargetK target;  // K = 0: match the quiescent terminal slope profile
  target.k.breakpoints = {0.0};
  target.k.values = {pair.theta_g(), pair.theta_f()};
  target.c = 1.0;

  dfc::MinimizeKnobs knobs;
  knobs.n_knots = 8;
  knobs.starts = 6;
  knobs.sweeps = 12;
  knobs.dx = 4e-3;

  dfc::MinimizeResult r = dfc::minimize(pair, target, T, knobs);
  std::printf("M1 = %.4f  M2 = %.4f  M3 = %.4f\n", r.M1, r.M2, r.M3);
  std::printf("reduced cost J~* = %.6e, grid cost J = %.6f (baseline %.6f)\n",
              r.J_reduced.total, r.J_grid, r.baseline_J);
  std::printf("optimizer trace (%zu accepted steps):\n", r.trace.size());
  for (const auto& row : r.trace)
    std::printf("  step %3d: J~ = %.6e\n", row.step, row.J);
  std::printf("returned alpha: R1 = %.4f, R2 = %.4f, window [%.3f, %.3f]\n", r.alpha.R1,
              r.alpha.R2, r.alpha.xlo, r.alpha.xhi);
  return 0;
}
