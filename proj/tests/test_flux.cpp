#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dfc/flux.hpp"
#include "oracles.hpp"

using namespace dfc;
using Catch::Approx;

TEST_CASE("legendre dual: quadratic, minimum point, quartic") {
  auto f = ConvexFlux::quadratic(0.5, 0.0, 0.0);
  CHECK(legendre_dual(f, 3.0) == Approx(4.5).margin(1e-12));  // f* = p^2/2

  auto g = ConvexFlux::quadratic(0.5, 0.0, 1.0);
  CHECK(legendre_dual(g, 0.0) == Approx(-g.min_value()).margin(1e-12));

  auto q = ConvexFlux::polynomial({0.0, 0.0, 0.0, 0.0, 0.25}, 6.0);  // u^4/4
  q.validate();
  // frozen from the dense-scan oracle (step 1e-6 over [-3,3]); analytic 0.75
  const double frozen = 0.750000000;
  CHECK(legendre_dual(q, 1.0) == Approx(frozen).margin(1e-6));
  CHECK(legendre_dual(q, 1.0) ==
        Approx(oracle::legendre_scan([](double u) { return 0.25 * u * u * u * u; }, 1.0))
            .margin(1e-6));
}

TEST_CASE("legendre dual: out-of-range slope is rejected") {
  auto q = ConvexFlux::polynomial({0.0, 0.0, 0.0, 0.0, 0.25}, 2.0);
  CHECK_THROWS_AS(legendre_dual(q, 100.0), std::out_of_range);
}

TEST_CASE("branch inverse: examples and no-preimage error") {
  auto g = ConvexFlux::quadratic(0.5, 0.0, 1.0);
  CHECK(branch_inverse(g, 3.0, Branch::plus) == Approx(2.0).margin(1e-12));
  CHECK(branch_inverse(g, g.min_value(), Branch::plus) == Approx(0.0).margin(1e-12));
  CHECK(branch_inverse(g, g.min_value(), Branch::minus) == Approx(0.0).margin(1e-12));
  CHECK(branch_inverse(g, 1.5, Branch::minus) == Approx(-1.0).margin(1e-12));
  CHECK_THROWS_AS(branch_inverse(g, 0.5, Branch::plus), infeasible_error);
}

TEST_CASE("branch inverse round trip on random states") {
  auto q = ConvexFlux::polynomial({0.0, 0.1, 1.0, 0.0, 0.25}, 6.0);
  q.validate();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double u = U(rng);
    const Branch br = u >= q.argmin() ? Branch::plus : Branch::minus;
    CHECK(std::fabs(branch_inverse(q, q.value(u), br) - u) < 1e-9);
  }
}

TEST_CASE("dual involution (f*)'(f'(u)) = u") {
  auto q = ConvexFlux::polynomial({0.3, -0.2, 0.7, 0.0, 0.05}, 6.0);
  q.validate();
  for (int i = 0; i <= 40; ++i) {
    const double u = -4.0 + 8.0 * i / 40.0;
    CHECK(std::fabs(q.inv_slope(q.slope(u)) - u) < 1e-9);
  }
}

TEST_CASE("h_plus: boundary, closed form and monotonicity") {
  auto pair = burgers_shifted();
  const double s2 = std::sqrt(2.0);
  CHECK(pair.theta_bar_g() == Approx(s2).margin(1e-12));
  CHECK(pair.theta_dbar_g() == Approx(-s2).margin(1e-12));
  // theta_bar carries ~1e-16 flux error; the square root maps it to ~1e-8
  CHECK(h_plus(pair, s2) == Approx(0.0).margin(1e-7));
  // h_+(p) = sqrt(p^2 - 2) for f = u^2/2, g = u^2/2 + 1
  CHECK(h_plus(pair, 2.0) == Approx(s2).margin(1e-10));
  CHECK(h_plus(pair, 3.0) == Approx(std::sqrt(7.0)).margin(1e-10));
  CHECK_THROWS_AS(h_plus(pair, s2 - 1e-6), std::domain_error);

  double prev = -1.0;
  for (int i = 0; i <= 64; ++i) {
    const double p = s2 + 4.0 * i / 64.0;
    const double h = h_plus(pair, p);
    CHECK(h >= prev - 1e-14);
    if (i > 1) CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("h_plus against a four-map composition with a generic pair") {
  auto f = ConvexFlux::polynomial({0.0, 0.1, 0.6, 0.0, 0.02}, 8.0);
  auto g = ConvexFlux::polynomial({0.9, 0.0, 0.8}, 8.0);
  f.validate();
  g.validate();
  FluxPair pair(f, g);
  for (double p : {pair.i_plus_min() + 0.3, pair.i_plus_min() + 1.1}) {
    // independent composition via oracle scans
    const double u = oracle::scan_bisect([&](double q) { return f.slope(q) - p; }, -8.0, 8.0);
    const double fu = f.value(u);
    const double b =
        oracle::scan_bisect([&](double q) { return g.value(q) - fu; }, g.argmin(), 8.0);
    CHECK(h_plus(pair, p) == Approx(g.slope(b)).margin(1e-7));
  }
}

TEST_CASE("solve_t_plus: trivial cases and the frozen instance") {
  auto pair = burgers_shifted();
  const double s2 = std::sqrt(2.0);
  CHECK(solve_t_plus(pair, s2, 0.0, 2.0) == Approx(1.0).margin(1e-12));
  CHECK(solve_t_plus(pair, 0.0, -1.0, 2.0) == Approx(2.0).margin(1e-15));
  CHECK(solve_t_plus(pair, 0.0, 0.0, 2.0) == Approx(2.0).margin(1e-15));

  // frozen from the dense-scan oracle (10^6-point grid + bisection)
  const double frozen = 1.371506974000;
  const double t = solve_t_plus(pair, 1.0, -1.0, 2.0);
  CHECK(t == Approx(frozen).margin(1e-8));
  CHECK(std::fabs(pair.h_plus(1.0 / (2.0 - t)) + (-1.0) / t) < 1e-10);
  oracle::BurgersShift bs{1.0};
  CHECK(t == Approx(bs.t_plus(1.0, -1.0, 2.0)).margin(1e-8));

  CHECK_THROWS_AS(solve_t_plus(pair, -1.0, -1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_t_plus(pair, 1.0, 0.5, 2.0), std::invalid_argument);
  // rho = 0 hypothesis violated: T - x/f'(theta_bar_g) < 0
  CHECK_THROWS_AS(solve_t_plus(pair, 10.0, 0.0, 2.0), infeasible_error);
}

TEST_CASE("solve_t_plus strictly decreasing in x for fixed foot") {
  auto pair = burgers_shifted();
  for (double rho : {-0.3, -1.0, -2.5}) {
    double prev = 1e9;
    for (int i = 1; i <= 50; ++i) {
      const double x = 3.0 * i / 50.0;
      const double t = solve_t_plus(pair, x, rho, 2.0);
      CHECK(t < prev);
      prev = t;
    }
  }
}

TEST_CASE("flux pair validation") {
  // f(theta_f) > g(theta_g) violates the standing assumption
  CHECK_THROWS_AS(FluxPair(ConvexFlux::quadratic(0.5, 0.0, 2.0),
                           ConvexFlux::quadratic(0.5, 0.0, 0.0)),
                  std::invalid_argument);
  // equality pair: theta_bar = theta_dbar = theta_f, I+ = [0, inf)
  FluxPair eq(ConvexFlux::quadratic(0.5, 0.0, 0.0), ConvexFlux::quadratic(0.5, 1.0, 0.0));
  CHECK(eq.theta_bar_g() == Approx(0.0).margin(1e-12));
  CHECK(eq.i_plus_min() == Approx(0.0).margin(1e-12));
  CHECK(h_plus(eq, 0.0) == Approx(0.0).margin(1e-10));
  CHECK(std::fabs(eq.f().value(eq.theta_dbar_g()) - eq.f().value(eq.theta_bar_g())) < 1e-10);
  CHECK(std::fabs(eq.f().value(eq.theta_bar_g()) - eq.g().min_value()) < 1e-10);
}
