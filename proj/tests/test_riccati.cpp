#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "shearwave/riccati.hpp"

using namespace shearwave;

TEST_CASE("uniform flow reduces to q = |k| tanh((x3+d)|k|)") {
  const auto U = ShearProfile::polynomial({1.0}, 1.0);
  for (const double kn : {0.5, 1.0, 2.0}) {
    const auto sol = solve_riccati(U, {kn, 0.0}, 1e-11);
    double err = 0.0;
    for (std::size_t i = 0; i < sol.nodes.size(); ++i)
      err = std::max(err, std::abs(sol.q[i] - kn * std::tanh((sol.nodes[i] + 1.0) * kn)));
    CHECK(err < 1e-9);
  }
}

TEST_CASE("initial condition q(-d) = 0 and positivity") {
  const auto U = ShearProfile::polynomial({2.0, 0.5, 0.2}, 1.5);
  const auto sol = solve_riccati(U, {1.0, 2.0});
  CHECK(sol.q.front() == 0.0);
  for (std::size_t i = 1; i < sol.q.size(); ++i) CHECK(sol.q[i] > 0.0);
}

TEST_CASE("sheared profile matches the fixed-step oracle") {
  const auto U = ShearProfile::polynomial({2.0, 1.0}, 1.0);
  const auto sol = solve_riccati(U, {1.0, 0.0}, 1e-11);
  CHECK(sol.q_surface == doctest::Approx(oracle::q0_affine_k10).epsilon(1e-10));
  // and the same from the live oracle, lower resolution
  const double live = oracle::rk4_riccati_surface([](double x) { return 1.0 / (2.0 + x); }, 1.0,
                                                  1.0, 20000);
  CHECK(sol.q_surface == doctest::Approx(live).epsilon(1e-9));
}

TEST_CASE("Riccati residual at interior midpoints") {
  // Grid dense enough that the central-difference error sits well below
  // the solver bound 100 tol (|k|^2 + q^2).
  const auto U = ShearProfile::polynomial({2.0, 1.0}, 1.0);
  const double tol = 1e-10;
  const auto sol = solve_riccati(U, {1.0, 1.0}, tol, linspace(-1.0, 0.0, 20001));
  const double k2 = 2.0;
  for (std::size_t i = 1; i + 1 < sol.nodes.size(); ++i) {
    const double h = sol.nodes[i + 1] - sol.nodes[i - 1];
    const double dq = (sol.q[i + 1] - sol.q[i - 1]) / h;
    const double q = sol.q[i];
    const double rhs = 2.0 * U.log_derivative(sol.nodes[i]) * q + k2 - q * q;
    CHECK(std::abs(dq - rhs) <= 100.0 * tol * (k2 + q * q));
  }
  CHECK(sol.q_surface_error > 0.0);
  CHECK(sol.q_surface_error < 1e-6);
}

TEST_CASE("tanh bounds: closed form and limits") {
  SUBCASE("m = 0 collapses to |k| tanh(d|k|)") {
    const auto l = riccati_bounds({1.0, 0.0}, 0.0, 1.0);
    CHECK(l(0.0) == doctest::Approx(std::tanh(1.0)).epsilon(1e-14));
    const auto l2 = riccati_bounds({3.0, 4.0}, 0.0, 2.0);  // |k| = 5
    CHECK(l2(0.0) == doctest::Approx(5.0 * std::tanh(10.0)).epsilon(1e-14));
  }
  SUBCASE("l solves the constant-m Riccati equation (finite differences)") {
    const double m = 0.7, kn = 1.3, d = 1.0;
    const auto l = riccati_bounds({kn, 0.0}, m, d);
    const double h = 1e-6;
    for (double x = -0.9; x < 0.0; x += 0.13) {
      const double dl = (l(x + h) - l(x - h)) / (2.0 * h);
      const double rhs = 2.0 * m * l(x) + kn * kn - l(x) * l(x);
      CHECK(dl == doctest::Approx(rhs).epsilon(1e-7));
    }
  }
  SUBCASE("l(0)/|k| -> 1 for large |k|") {
    for (const double m : {-1.0, 0.0, 1.0}) {
      const auto l = riccati_bounds({200.0, 0.0}, m, 1.0);
      CHECK(l(0.0) / 200.0 == doctest::Approx(1.0).epsilon(0.01));
    }
  }
}

TEST_CASE("envelope property on random cubic profiles") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> c0(1.6, 3.0), ci(-0.5, 0.5), kd(0.3, 8.0),
      ang(0.0, 1.5);
  for (int trial = 0; trial < 6; ++trial) {
    const auto U = ShearProfile::polynomial({c0(rng), ci(rng), ci(rng), ci(rng)}, 1.0);
    const auto [m_inf, m_sup] = logderiv_extrema(U);
    const double kn = kd(rng), th = ang(rng);
    const std::array<double, 2> k{kn * std::cos(th), kn * std::sin(th)};
    const auto sol = solve_riccati(U, k);
    const auto lo = riccati_bounds(k, m_inf, 1.0);
    const auto hi = riccati_bounds(k, m_sup, 1.0);
    for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
      CHECK(sol.q[i] >= lo(sol.nodes[i]) - 1e-8 * std::max(1.0, kn) - 1e-12);
      CHECK(sol.q[i] <= hi(sol.nodes[i]) + 1e-8 * std::max(1.0, kn) + 1e-12);
    }
  }
}

TEST_CASE("pressure profile Q") {
  const auto U = ShearProfile::polynomial({1.0}, 1.0);
  SUBCASE("uniform flow: Q(0) = 1/tanh(1) for k = (1,0)") {
    const auto sol = solve_riccati(U, {1.0, 0.0}, 1e-11);
    const auto Q = pressure_profile(sol, 1.0);
    CHECK(Q.back() == doctest::Approx(1.0 / std::tanh(1.0)).epsilon(1e-10));
  }
  SUBCASE("Q > 0 and strictly increasing in x3") {
    const auto Uq = ShearProfile::polynomial({2.0, 1.0}, 1.0);
    const auto sol = solve_riccati(Uq, {1.0, 1.0});
    const auto Q = pressure_profile(sol, Uq.value(0.0));
    for (std::size_t i = 0; i < Q.size(); ++i) CHECK(Q[i] > 0.0);
    for (std::size_t i = 1; i < Q.size(); ++i) CHECK(Q[i] > Q[i - 1]);
  }
  SUBCASE("k1 = 0 throws (Q vanishes identically)") {
    const auto sol = solve_riccati(U, {0.0, 1.0});
    CHECK_THROWS_AS(pressure_profile(sol, 1.0), ZeroFirstComponent);
  }
  SUBCASE("sign flips of k give identical q and Q") {
    const auto Uq = ShearProfile::polynomial({2.0, 1.0}, 1.0);
    const auto a = solve_riccati(Uq, {1.0, 1.0});
    const auto b = solve_riccati(Uq, {-1.0, -1.0});
    CHECK(a.q_surface == b.q_surface);
    const auto Qa = pressure_profile(a, 2.0);
    const auto Qb = pressure_profile(b, 2.0);
    for (std::size_t i = 0; i < Qa.size(); ++i) CHECK(Qa[i] == Qb[i]);
  }
}

TEST_CASE("divergence-form identity (Q'/U^2)' = |k|^2 Q/U^2") {
  const auto U = ShearProfile::polynomial({2.0, 1.0}, 1.0);
  const double k2 = 2.0;
  const auto sol = solve_riccati(U, {1.0, 1.0}, 1e-11, linspace(-1.0, 0.0, 4001));
  const auto Q = pressure_profile(sol, U.value(0.0));
  // G := Q'/U^2 = q Q / U^2; central-difference G' against |k|^2 Q / U^2.
  std::vector<double> G(Q.size());
  for (std::size_t i = 0; i < Q.size(); ++i) {
    const double u = U.value(sol.nodes[i]);
    G[i] = sol.q[i] * Q[i] / (u * u);
  }
  for (std::size_t i = 1; i + 1 < Q.size(); ++i) {
    const double h = sol.nodes[i + 1] - sol.nodes[i - 1];
    const double dG = (G[i + 1] - G[i - 1]) / h;
    const double u = U.value(sol.nodes[i]);
    CHECK(dG == doctest::Approx(k2 * Q[i] / (u * u)).epsilon(1e-5));
  }
}

TEST_CASE("solver input validation") {
  const auto U = ShearProfile::polynomial({1.0}, 1.0);
  CHECK_THROWS_AS(solve_riccati(U, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(solve_riccati(U, {1.0, 0.0}, -1.0), std::invalid_argument);
  std::vector<double> bad{-1.0, -0.5, -0.6, 0.0};
  CHECK_THROWS_AS(solve_riccati(U, {1.0, 0.0}, 1e-10, bad), std::invalid_argument);
}

TEST_CASE("stagnant profiles defeat step control") {
  // U = x3 + 0.5 has a zero at x3 = -0.5; the right-hand side blows up and
  // the controller must give up rather than silently continue.
  const auto U = ShearProfile::polynomial({0.5, 1.0}, 1.0);
  CHECK_THROWS_AS(solve_riccati(U, {1.0, 0.0}), IntegrationFailure);
}
