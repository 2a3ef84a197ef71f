#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "shearwave/fields.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/spectral.hpp"

namespace shearwave {

/// Norms of the flattened-system residuals. Norms of an exact trivial
/// state stay at scheme tolerance; acceptance checks use the max norms.
struct ResidualReport {
  double momentum_max = 0.0;
  double momentum_l2 = 0.0;
  double divergence_max = 0.0;
  double divergence_l2 = 0.0;
  double kinematic_top_max = 0.0;
  double kinematic_bottom_max = 0.0;
  double dynamic_max = 0.0;
  double dynamic_l2 = 0.0;

  double overall_max() const {
    return std::max({momentum_max, divergence_max, kinematic_top_max, kinematic_bottom_max,
                     dynamic_max});
  }
};

/// Momentum, incompressibility, kinematic and dynamic residuals of the full
/// nonlinear flattened system, evaluated at collocation nodes. The
/// surface-tension divergence form is expanded analytically:
///   div(grad eta / W) = ((1+eta2^2) eta11 - 2 eta1 eta2 eta12 + (1+eta1^2) eta22) / W^3.
inline ResidualReport nonlinear_residual(const FlowState& state, const WaveParams& params,
                                         std::size_t n1, std::size_t n2) {
  if (!params.condition.is_default())
    throw std::invalid_argument(
        "nonlinear_residual: generalized dynamic conditions are linear-level objects");
  const auto& lattice = state.u.c1.lattice;
  const auto& vgrid = state.u.c1.vgrid;
  const std::size_t n3 = vgrid.size();

  const Flattening flat = build_flattening(state.eta, n1, n2);

  const Grid3D u1 = synthesize(state.u.c1, n1, n2);
  const Grid3D u2 = synthesize(state.u.c2, n1, n2);
  const Grid3D u3 = synthesize(state.u.c3, n1, n2);

  // w = M u.
  Grid3D w1(lattice, vgrid, n1, n2), w2(lattice, vgrid, n1, n2), w3(lattice, vgrid, n1, n2);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q) {
      const double rho = flat.rho.at(p, q);
      for (std::size_t l = 0; l < n3; ++l) {
        const double a = u1.at(p, q, l), b = u2.at(p, q, l), c = u3.at(p, q, l);
        w1.at(p, q, l) = a / rho;
        w2.at(p, q, l) = b / rho;
        w3.at(p, q, l) = (flat.dphi1.at(p, q, l) * a + flat.dphi2.at(p, q, l) * b) / rho + c;
      }
    }

  const Grid3D dw1_1 = grid_derivative(w1, 1), dw1_2 = grid_derivative(w1, 2),
               dw1_3 = grid_derivative(w1, 3);
  const Grid3D dw2_1 = grid_derivative(w2, 1), dw2_2 = grid_derivative(w2, 2),
               dw2_3 = grid_derivative(w2, 3);
  const Grid3D dw3_1 = grid_derivative(w3, 1), dw3_2 = grid_derivative(w3, 2),
               dw3_3 = grid_derivative(w3, 3);

  const Grid3D dwp1 = synthesize(state.wp.differentiated(1), n1, n2);
  const Grid3D dwp2 = synthesize(state.wp.differentiated(2), n1, n2);
  const Grid3D dwp3 = synthesize(state.wp.differentiated(3), n1, n2);

  ResidualReport rep;
  double mom_sq = 0.0;
  std::size_t mom_count = 0;
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q) {
      const double rho = flat.rho.at(p, q);
      for (std::size_t l = 0; l < n3; ++l) {
        const double a = u1.at(p, q, l), b = u2.at(p, q, l), c = u3.at(p, q, l);
        const double A1 = a * dw1_1.at(p, q, l) + b * dw1_2.at(p, q, l) + c * dw1_3.at(p, q, l);
        const double A2 = a * dw2_1.at(p, q, l) + b * dw2_2.at(p, q, l) + c * dw2_3.at(p, q, l);
        const double A3 = a * dw3_1.at(p, q, l) + b * dw3_2.at(p, q, l) + c * dw3_3.at(p, q, l);
        const double r1 = (A1 + flat.dphi1.at(p, q, l) * A3) / rho + dwp1.at(p, q, l);
        const double r2 = (A2 + flat.dphi2.at(p, q, l) * A3) / rho + dwp2.at(p, q, l);
        const double r3 = A3 + dwp3.at(p, q, l);
        rep.momentum_max = std::max({rep.momentum_max, std::abs(r1), std::abs(r2), std::abs(r3)});
        mom_sq += r1 * r1 + r2 * r2 + r3 * r3;
        mom_count += 3;
      }
    }
  rep.momentum_l2 = std::sqrt(mom_sq / static_cast<double>(mom_count));

  const Grid3D div = synthesize(state.u.divergence(), n1, n2);
  rep.divergence_max = div.max_abs();
  rep.divergence_l2 = div.rms();

  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q) {
      rep.kinematic_bottom_max = std::max(rep.kinematic_bottom_max, std::abs(u3.at(p, q, 0)));
      rep.kinematic_top_max = std::max(rep.kinematic_top_max, std::abs(u3.at(p, q, n3 - 1)));
    }

  const Grid3D wp = synthesize(state.wp, n1, n2);
  const Grid2D eta1g = synthesize_surface(state.eta.differentiated(1), n1, n2);
  const Grid2D eta2g = synthesize_surface(state.eta.differentiated(2), n1, n2);
  const Grid2D eta11 = synthesize_surface(state.eta.differentiated(1).differentiated(1), n1, n2);
  const Grid2D eta12 = synthesize_surface(state.eta.differentiated(1).differentiated(2), n1, n2);
  const Grid2D eta22 = synthesize_surface(state.eta.differentiated(2).differentiated(2), n1, n2);
  double dyn_sq = 0.0;
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q) {
      const double e1 = eta1g.at(p, q), e2 = eta2g.at(p, q);
      const double W = std::sqrt(1.0 + e1 * e1 + e2 * e2);
      const double curv = ((1.0 + e2 * e2) * eta11.at(p, q) - 2.0 * e1 * e2 * eta12.at(p, q) +
                           (1.0 + e1 * e1) * eta22.at(p, q)) /
                          (W * W * W);
      const double r = wp.at(p, q, n3 - 1) - params.g * flat.eta.at(p, q) + params.sigma * curv;
      rep.dynamic_max = std::max(rep.dynamic_max, std::abs(r));
      dyn_sq += r * r;
    }
  rep.dynamic_l2 = std::sqrt(dyn_sq / static_cast<double>(n1 * n2));
  return rep;
}

/// Residuals of one Fourier mode of the linearized system, max over nodes.
struct LinearModeResidual {
  ModeKey key;
  double momentum1 = 0.0, momentum2 = 0.0, momentum3 = 0.0;
  double divergence = 0.0;
  double kinematic_top = 0.0, kinematic_bottom = 0.0;
  double dynamic = 0.0;

  double overall() const {
    return std::max({momentum1, momentum2, momentum3, divergence, kinematic_top,
                     kinematic_bottom, dynamic});
  }
};

struct LinearReport {
  std::vector<LinearModeResidual> per_mode;
  ResidualReport aggregate;
};

/// Mode-wise evaluation of the order-eps system in trigonometric form:
///   mom1 = U' u3 - k1 U u1 + U^2 k1 eta/d - k1 wp
///   mom2 = k1 U u2 - k2 wp
///   mom3 = k1 U u3 - U^2 k1^2 (1+x3/d) eta + wp'
///   div  = -k1 u1 + k2 u2 + u3'
/// plus kinematic (u3 at both boundaries) and the dynamic condition
/// wp(0) = D(|k|^2) eta (D(0) eta at k = 0).
inline LinearReport linear_residual(const KernelFields& fields, const ShearProfile& profile,
                                    const WaveParams& params) {
  const auto& lattice = fields.wp1.lattice;
  const auto& vgrid = fields.wp1.vgrid;
  const std::size_t n3 = vgrid.size();
  const double d = vgrid.depth;

  std::vector<double> U(n3), dU(n3);
  for (std::size_t l = 0; l < n3; ++l) {
    U[l] = profile.value(vgrid.nodes[l]);
    dU[l] = profile.derivative(vgrid.nodes[l]);
  }

  std::map<ModeKey, bool> keys;
  for (const auto& [k, _] : fields.eta1.modes) keys[k] = true;
  for (const auto& [k, _] : fields.wp1.modes) keys[k] = true;
  for (const auto& [k, _] : fields.u1.c1.modes) keys[k] = true;
  for (const auto& [k, _] : fields.u1.c2.modes) keys[k] = true;
  for (const auto& [k, _] : fields.u1.c3.modes) keys[k] = true;

  const std::vector<double> zeros(n3, 0.0);
  auto profile_of = [&](const SpectralField& f, ModeKey k) -> const std::vector<double>& {
    auto it = f.modes.find(k);
    return it == f.modes.end() ? zeros : it->second;
  };

  LinearReport report;
  for (const auto& [key, _] : keys) {
    const double k1 = lattice.kappa1() * key.i;
    const double k2 = lattice.kappa2() * key.j;
    const auto& e = profile_of(fields.eta1, key);
    const auto& p = profile_of(fields.wp1, key);
    const auto& a1 = profile_of(fields.u1.c1, key);
    const auto& a2 = profile_of(fields.u1.c2, key);
    const auto& a3 = profile_of(fields.u1.c3, key);
    const auto dp = vgrid.derivative(p);
    const auto da3 = vgrid.derivative(a3);

    LinearModeResidual r;
    r.key = key;
    for (std::size_t l = 0; l < n3; ++l) {
      const double lift = 1.0 + vgrid.nodes[l] / d;
      const double m1 = dU[l] * a3[l] - k1 * U[l] * a1[l] + U[l] * U[l] * k1 * e[l] / d -
                        k1 * p[l];
      const double m2 = k1 * U[l] * a2[l] - k2 * p[l];
      const double m3 = k1 * U[l] * a3[l] - U[l] * U[l] * k1 * k1 * lift * e[l] + dp[l];
      const double dv = -k1 * a1[l] + k2 * a2[l] + da3[l];
      r.momentum1 = std::max(r.momentum1, std::abs(m1));
      r.momentum2 = std::max(r.momentum2, std::abs(m2));
      r.momentum3 = std::max(r.momentum3, std::abs(m3));
      r.divergence = std::max(r.divergence, std::abs(dv));
    }
    r.kinematic_bottom = std::abs(a3.front());
    r.kinematic_top = std::abs(a3.back());
    const double ksq = k1 * k1 + k2 * k2;
    r.dynamic = std::abs(p.back() - params.D(ksq) * e.back());
    report.per_mode.push_back(r);

    report.aggregate.momentum_max =
        std::max({report.aggregate.momentum_max, r.momentum1, r.momentum2, r.momentum3});
    report.aggregate.divergence_max = std::max(report.aggregate.divergence_max, r.divergence);
    report.aggregate.kinematic_top_max =
        std::max(report.aggregate.kinematic_top_max, r.kinematic_top);
    report.aggregate.kinematic_bottom_max =
        std::max(report.aggregate.kinematic_bottom_max, r.kinematic_bottom);
    report.aggregate.dynamic_max = std::max(report.aggregate.dynamic_max, r.dynamic);
  }
  return report;
}

struct ScalingProbe {
  std::vector<double> eps;
  std::vector<ResidualReport> reports;
  std::vector<double> norms;  // overall max per eps
  double slope = 0.0;
  bool exact_solution = false;
};

/// Residual of trivial + eps * kernel along a geometric eps list; the
/// first-order terms cancel, so log(norm) against log(eps) fits slope 2.
inline ScalingProbe order_scaling_probe(const ShearProfile& profile, const WaveParams& params,
                                        const KernelFields& kernel,
                                        std::vector<double> eps_list, std::size_t n1,
                                        std::size_t n2) {
  if (eps_list.empty())
    eps_list = {1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4};
  const auto& lattice = kernel.wp1.lattice;
  const auto& vgrid = kernel.wp1.vgrid;
  const FlowState trivial = trivial_state(profile, lattice, vgrid);

  ScalingProbe probe;
  probe.eps = eps_list;
  probe.reports.resize(eps_list.size());
  parallel_for(eps_list.size(), [&](std::size_t n) {
    const FlowState state = perturbed_state(trivial, kernel, eps_list[n]);
    probe.reports[n] = nonlinear_residual(state, params, n1, n2);
  });
  for (const auto& rep : probe.reports) probe.norms.push_back(rep.overall_max());

  double biggest = 0.0;
  for (double v : probe.norms) biggest = std::max(biggest, v);
  if (biggest <= 1e-10) {
    probe.exact_solution = true;
    return probe;
  }
  std::vector<double> lx, ly;
  for (std::size_t n = 0; n < eps_list.size(); ++n) {
    lx.push_back(std::log(eps_list[n]));
    ly.push_back(std::log(probe.norms[n]));
  }
  probe.slope = fit_slope(lx, ly);
  return probe;
}

}  // namespace shearwave
