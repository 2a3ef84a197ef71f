#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "shearwave/errors.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/util.hpp"

namespace shearwave {

/// q_k on [-d, 0]: the log-derivative of the first-order pressure
/// coefficient, solving q' = 2(U'/U) q + |k|^2 - q^2 with q(-d) = 0.
/// q_integral holds the running integral of q from -d, so that
/// int_0^{x3} q = q_integral(x3) - q_integral(0).
struct RiccatiSolution {
  std::array<double, 2> k{0.0, 0.0};
  double depth = 0.0;
  std::vector<double> nodes;       // ascending, nodes.front() == -d, nodes.back() == 0
  std::vector<double> q;           // q at nodes
  std::vector<double> q_integral;  // int_{-d}^{x3} q
  double q_surface = 0.0;
  double q_surface_error = 0.0;  // accumulated local error estimates
  std::size_t steps = 0;

  double k_norm() const { return std::hypot(k[0], k[1]); }
};

/// Explicit solution of the constant-coefficient comparison problem
/// l' = 2 m l + |k|^2 - l^2, l(-d) = 0. With m = inf U'/U it bounds q from
/// below, with m = sup U'/U from above.
struct RiccatiBound {
  double k_norm = 1.0;
  double m = 0.0;
  double depth = 1.0;

  double operator()(double x3) const {
    const double s = std::sqrt(m * m + k_norm * k_norm);
    const double t = std::tanh((x3 + depth) * s);
    return k_norm * k_norm * t / (s - m * t);
  }
};

inline RiccatiBound riccati_bounds(const std::array<double, 2>& k, double m, double depth) {
  const double kn = std::hypot(k[0], k[1]);
  if (!(kn > 0.0)) throw std::invalid_argument("riccati_bounds: |k| must be > 0");
  return RiccatiBound{kn, m, depth};
}

namespace detail {

using Pair = std::array<double, 2>;

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive DOPRI5 solve of the Riccati problem for one wavevector.
/// Steps are clipped so that every requested output node is hit exactly;
/// output_nodes defaults to 257 uniform nodes on [-d, 0].
inline RiccatiSolution solve_riccati(const ShearProfile& profile,
                                     const std::array<double, 2>& k, double tol = 1e-10,
                                     std::vector<double> output_nodes = {}) {
  const double d = profile.depth();
  const double k2 = k[0] * k[0] + k[1] * k[1];
  const double kn = std::sqrt(k2);
  if (!(kn > 0.0)) throw std::invalid_argument("solve_riccati: |k| must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_riccati: tol must be > 0");

  if (output_nodes.empty()) output_nodes = linspace(-d, 0.0, 257);
  if (std::abs(output_nodes.front() + d) > 1e-12 * d || std::abs(output_nodes.back()) > 1e-12 * d)
    throw std::invalid_argument("solve_riccati: output nodes must span [-d, 0]");
  for (std::size_t i = 1; i < output_nodes.size(); ++i)
    if (!(output_nodes[i] > output_nodes[i - 1]))
      throw std::invalid_argument("solve_riccati: output nodes must be strictly increasing");
  output_nodes.front() = -d;
  output_nodes.back() = 0.0;

  auto rhs = [&](double x, const detail::Pair& y) -> detail::Pair {
    const double m = profile.log_derivative(x);
    return {2.0 * m * y[0] + k2 - y[0] * y[0], y[0]};
  };

  const double scale_q = std::max(1.0, kn);
  const double scale_i = scale_q * d;

  RiccatiSolution sol;
  sol.k = k;
  sol.depth = d;
  sol.nodes = output_nodes;
  sol.q.reserve(output_nodes.size());
  sol.q_integral.reserve(output_nodes.size());

  using detail::Dopri5;
  double x = -d;
  detail::Pair y{0.0, 0.0};
  detail::Pair k1 = rhs(x, y);
  double h = std::min(1e-3 * d, 0.1 / scale_q);
  double err_accum = 0.0;
  std::size_t steps = 0;
  const double h_min = 1e-14 * d;
  const std::size_t max_steps = 10'000'000;

  sol.q.push_back(y[0]);
  sol.q_integral.push_back(y[1]);

  for (std::size_t target = 1; target < output_nodes.size(); ++target) {
    const double xt = output_nodes[target];
    while (x < xt - 1e-15 * d) {
      if (steps++ > max_steps)
        throw IntegrationFailure("solve_riccati: step limit exceeded");
      bool clipped = false;
      const double h_ctrl = h;  // controller step, restored after a clipped hit
      if (h > xt - x) {
        h = xt - x;
        clipped = true;
      }
      const auto& T = Dopri5{};
      detail::Pair k2s, k3s, k4s, k5s, k6s, k7s, y5;
      auto stage = [&](double cs, const detail::Pair& incr) {
        return rhs(x + cs * h, {y[0] + h * incr[0], y[1] + h * incr[1]});
      };
      k2s = stage(T.c2, {T.a21 * k1[0], T.a21 * k1[1]});
      k3s = stage(T.c3, {T.a31 * k1[0] + T.a32 * k2s[0], T.a31 * k1[1] + T.a32 * k2s[1]});
      k4s = stage(T.c4, {T.a41 * k1[0] + T.a42 * k2s[0] + T.a43 * k3s[0],
                         T.a41 * k1[1] + T.a42 * k2s[1] + T.a43 * k3s[1]});
      k5s = stage(T.c5,
                  {T.a51 * k1[0] + T.a52 * k2s[0] + T.a53 * k3s[0] + T.a54 * k4s[0],
                   T.a51 * k1[1] + T.a52 * k2s[1] + T.a53 * k3s[1] + T.a54 * k4s[1]});
      k6s = stage(1.0, {T.a61 * k1[0] + T.a62 * k2s[0] + T.a63 * k3s[0] + T.a64 * k4s[0] +
                            T.a65 * k5s[0],
                        T.a61 * k1[1] + T.a62 * k2s[1] + T.a63 * k3s[1] + T.a64 * k4s[1] +
                            T.a65 * k5s[1]});
      for (int c = 0; c < 2; ++c)
        y5[c] = y[c] + h * (T.b1 * k1[c] + T.b3 * k3s[c] + T.b4 * k4s[c] + T.b5 * k5s[c] +
                            T.b6 * k6s[c]);
      k7s = rhs(x + h, y5);
      double err = 0.0;
      for (int c = 0; c < 2; ++c) {
        const double ec = h * (T.e1 * k1[c] + T.e3 * k3s[c] + T.e4 * k4s[c] +
                               T.e5 * k5s[c] + T.e6 * k6s[c] + T.e7 * k7s[c]);
        const double sk =
            tol * ((c == 0 ? scale_q : scale_i) + std::max(std::abs(y[c]), std::abs(y5[c])));
        err += (ec / sk) * (ec / sk);
      }
      err = std::sqrt(0.5 * err);
      if (err <= 1.0) {
        x += h;
        y = y5;
        k1 = k7s;
        err_accum += err * tol * scale_q;
        if (clipped) {
          h = h_ctrl;
        } else {
          const double grow = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
          h *= std::min(5.0, std::max(0.3, grow));
          h = std::min(h, d);
        }
      } else {
        h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < h_min) throw IntegrationFailure("solve_riccati: step size underflow");
      }
    }
    x = xt;
    sol.q.push_back(y[0]);
    sol.q_integral.push_back(y[1]);
  }

  sol.q_surface = sol.q.back();
  sol.q_surface_error = err_accum;
  sol.steps = steps;

  // Envelope and positivity invariants (tanh sub/super-solutions).
  const auto [m_inf, m_sup] = logderiv_extrema(profile);
  const RiccatiBound lower{kn, m_inf, d};
  const RiccatiBound upper{kn, m_sup, d};
  const double margin = 10.0 * tol * scale_q + 1e-12;
  for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
    const double qi = sol.q[i];
    const double lo = lower(sol.nodes[i]);
    const double hi = upper(sol.nodes[i]);
    if (qi < lo - margin || qi > hi + margin)
      throw BoundViolation("solve_riccati: q left the tanh envelope at x3 = " +
                           std::to_string(sol.nodes[i]));
    if (i > 0 && qi < -margin)
      throw BoundViolation("solve_riccati: q lost positivity at x3 = " +
                           std::to_string(sol.nodes[i]));
  }
  return sol;
}

/// Vertical pressure profile Q_k reconstructing wp_k from eta_k:
/// Q(x3) = (k1^2 U(0)^2 / q(0)) * exp(int_0^{x3} q). Sampled on sol.nodes.
inline std::vector<double> pressure_profile(const RiccatiSolution& sol, double surface_velocity) {
  if (sol.k[0] == 0.0)
    throw ZeroFirstComponent("pressure_profile: Q vanishes identically when k1 = 0");
  const double k1 = sol.k[0];
  const double prefactor = k1 * k1 * surface_velocity * surface_velocity / sol.q_surface;
  const double i0 = sol.q_integral.back();
  std::vector<double> Q(sol.nodes.size());
  for (std::size_t i = 0; i < Q.size(); ++i)
    Q[i] = prefactor * std::exp(sol.q_integral[i] - i0);
  return Q;
}

}  // namespace shearwave
