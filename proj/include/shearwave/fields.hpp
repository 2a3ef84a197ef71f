#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "shearwave/dispersion.hpp"
#include "shearwave/errors.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/spectral.hpp"

namespace shearwave {

/// Full flattened unknowns: velocity u, dynamic pressure wp, surface eta.
/// eta carries a single vertical profile (constant in x3).
struct FlowState {
  SymmetricVectorField u;
  SpectralField wp;
  SpectralField eta;

  FlowState() = default;
  FlowState(const LatticeSpec& lat, const VerticalGrid& vg)
      : u(lat, vg), wp(lat, vg), eta(lat, vg) {}
};

/// phi, its gradient and the normalized Jacobi data of the flattening
/// Phi(x) = x + phi e3 with phi = (1 + x3/d) eta, rho = 1 + eta/d = det J,
/// M = J / rho.
struct Flattening {
  Grid3D phi, dphi1, dphi2;
  Grid2D rho;       // n1 x n2
  Grid2D eta;       // n1 x n2
  double depth = 1.0;

  /// M entry (r, c), 1-based, materialized on the grid.
  Grid3D entry(int r, int c) const {
    Grid3D out(phi.lattice, phi.vgrid, phi.n1, phi.n2);
    for (std::size_t p = 0; p < phi.n1; ++p)
      for (std::size_t q = 0; q < phi.n2; ++q) {
        const double rho_pq = rho.at(p, q);
        for (std::size_t l = 0; l < phi.n3(); ++l) {
          double val = 0.0;
          if (r == c) val = (r == 3) ? 1.0 : 1.0 / rho_pq;
          if (r == 3 && c == 1) val = dphi1.at(p, q, l) / rho_pq;
          if (r == 3 && c == 2) val = dphi2.at(p, q, l) / rho_pq;
          out.at(p, q, l) = val;
        }
      }
    return out;
  }
};

/// Surface synthesis of an x3-constant field on the n1 x n2 horizontal grid.
inline Grid2D synthesize_surface(const SpectralField& eta, std::size_t n1, std::size_t n2) {
  if (eta.max_index1() >= static_cast<int>(n1 / 2) ||
      eta.max_index2() >= static_cast<int>(n2 / 2))
    throw AliasError("synthesize_surface: field modes violate the Nyquist bound");
  Grid2D out(n1, n2);
  for (const auto& [key, prof] : eta.modes) {
    const auto t1 = detail::basis_table(eta.parity.odd1, key.i, eta.lattice.kappa1(),
                                        eta.lattice.lambda1, n1);
    const auto t2 = detail::basis_table(eta.parity.odd2, key.j, eta.lattice.kappa2(),
                                        eta.lattice.lambda2, n2);
    const double amp = prof.back();  // constant profile: any node
    for (std::size_t p = 0; p < n1; ++p)
      for (std::size_t q = 0; q < n2; ++q) out.at(p, q) += amp * t1[p] * t2[q];
  }
  return out;
}

/// Build phi = (1 + x3/d) eta and the Jacobian data; throws if the surface
/// is not graph-like (rho <= 0 somewhere).
inline Flattening build_flattening(const SpectralField& eta, std::size_t n1, std::size_t n2) {
  const double d = eta.vgrid.depth;
  for (const auto& [key, prof] : eta.modes)
    for (const double v : prof)
      if (std::abs(v - prof.back()) > 1e-12 * (1.0 + std::abs(prof.back())))
        throw std::invalid_argument("build_flattening: eta must be constant in x3");
  Flattening f;
  f.depth = d;
  f.eta = synthesize_surface(eta, n1, n2);
  f.rho = Grid2D(n1, n2);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q) {
      const double rho = 1.0 + f.eta.at(p, q) / d;
      if (!(rho > 1e-12))
        throw DegenerateSurface("build_flattening: 1 + eta/d <= 0; surface not graph-like");
      f.rho.at(p, q) = rho;
    }
  const Grid2D deta1 = synthesize_surface(eta.differentiated(1), n1, n2);
  const Grid2D deta2 = synthesize_surface(eta.differentiated(2), n1, n2);
  f.phi = Grid3D(eta.lattice, eta.vgrid, n1, n2);
  f.dphi1 = Grid3D(eta.lattice, eta.vgrid, n1, n2);
  f.dphi2 = Grid3D(eta.lattice, eta.vgrid, n1, n2);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q)
      for (std::size_t l = 0; l < eta.vgrid.size(); ++l) {
        const double lift = 1.0 + eta.vgrid.nodes[l] / d;
        f.phi.at(p, q, l) = lift * f.eta.at(p, q);
        f.dphi1.at(p, q, l) = lift * deta1.at(p, q);
        f.dphi2.at(p, q, l) = lift * deta2.at(p, q);
      }
  return f;
}

/// First-order Jacobian term M1 = e3 (x) grad(phi1) - d3(phi1) I for the
/// linear-term check M = I + eps M1 + O(eps^2).
inline Grid3D first_order_jacobian_entry(const SpectralField& eta1, std::size_t n1,
                                         std::size_t n2, int r, int c) {
  const double d = eta1.vgrid.depth;
  const Grid2D e = synthesize_surface(eta1, n1, n2);
  const Grid2D de1 = synthesize_surface(eta1.differentiated(1), n1, n2);
  const Grid2D de2 = synthesize_surface(eta1.differentiated(2), n1, n2);
  Grid3D out(eta1.lattice, eta1.vgrid, n1, n2);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q)
      for (std::size_t l = 0; l < eta1.vgrid.size(); ++l) {
        const double lift = 1.0 + eta1.vgrid.nodes[l] / d;
        double val = 0.0;
        if (r == c && r != 3) val = -e.at(p, q) / d;  // -d3 phi1
        if (r == 3 && c == 1) val = lift * de1.at(p, q);
        if (r == 3 && c == 2) val = lift * de2.at(p, q);
        // (3,3): d3 phi1 - d3 phi1 = 0
        out.at(p, q, l) = val;
      }
  return out;
}

using VectorFunction = std::function<std::array<double, 3>(double, double, double)>;

/// Flatten a physical-domain vector field: J vbar = rho (v o Phi), so
/// vbar = (rho v1, rho v2, v3 - d1phi v1 - d2phi v2) evaluated at Phi(x).
/// Divergence-free fields stay divergence-free.
inline std::array<Grid3D, 3> pushforward_vector(const VectorFunction& v,
                                                const SpectralField& eta, std::size_t n1,
                                                std::size_t n2) {
  const Flattening f = build_flattening(eta, n1, n2);
  std::array<Grid3D, 3> out{Grid3D(eta.lattice, eta.vgrid, n1, n2),
                            Grid3D(eta.lattice, eta.vgrid, n1, n2),
                            Grid3D(eta.lattice, eta.vgrid, n1, n2)};
  Grid3D probe(eta.lattice, eta.vgrid, n1, n2);
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q)
      for (std::size_t l = 0; l < eta.vgrid.size(); ++l) {
        const double x1 = probe.x1(p), x2 = probe.x2(q), x3 = probe.x3(l);
        const auto phys = v(x1, x2, x3 + f.phi.at(p, q, l));
        const double rho = f.rho.at(p, q);
        out[0].at(p, q, l) = rho * phys[0];
        out[1].at(p, q, l) = rho * phys[1];
        out[2].at(p, q, l) =
            phys[2] - f.dphi1.at(p, q, l) * phys[0] - f.dphi2.at(p, q, l) * phys[1];
      }
  return out;
}

/// Inverse transform at the grid nodes: v(Phi(x)) = J vbar / rho.
inline std::array<Grid3D, 3> pullback_vector(const std::array<Grid3D, 3>& vbar,
                                             const SpectralField& eta) {
  const std::size_t n1 = vbar[0].n1, n2 = vbar[0].n2;
  const Flattening f = build_flattening(eta, n1, n2);
  std::array<Grid3D, 3> out = vbar;
  for (std::size_t p = 0; p < n1; ++p)
    for (std::size_t q = 0; q < n2; ++q)
      for (std::size_t l = 0; l < eta.vgrid.size(); ++l) {
        const double rho = f.rho.at(p, q);
        const double b1 = vbar[0].at(p, q, l), b2 = vbar[1].at(p, q, l),
                     b3 = vbar[2].at(p, q, l);
        out[0].at(p, q, l) = b1 / rho;
        out[1].at(p, q, l) = b2 / rho;
        out[2].at(p, q, l) =
            (f.dphi1.at(p, q, l) * b1 + f.dphi2.at(p, q, l) * b2 + rho * b3) / rho;
      }
  return out;
}

/// Trivial solution u = (U2d(x2, x3), 0, 0), wp = 0, eta = 0, for U2d even
/// and lambda2-periodic in x2. Rejects asymmetric or unresolved inputs.
inline FlowState trivial_state(const std::function<double(double, double)>& U2d,
                               const LatticeSpec& lattice, const VerticalGrid& vgrid,
                               std::size_t n2 = 64, double tol = 1e-9) {
  FlowState state(lattice, vgrid);
  const int max_j = static_cast<int>(n2) / 2 - 1;
  const std::size_t n3 = vgrid.size();
  // Project onto cos(j kappa2 x2) node by node.
  std::vector<std::vector<double>> samples(n2, std::vector<double>(n3));
  for (std::size_t q = 0; q < n2; ++q) {
    const double x2 = lattice.lambda2 * static_cast<double>(q) / static_cast<double>(n2);
    for (std::size_t l = 0; l < n3; ++l) samples[q][l] = U2d(x2, vgrid.nodes[l]);
  }
  double scale = 1e-12;
  for (const auto& row : samples)
    for (double s : row) scale = std::max(scale, std::abs(s));
  for (int j = 0; j <= max_j; ++j) {
    std::vector<double> prof(n3, 0.0);
    for (std::size_t q = 0; q < n2; ++q) {
      const double x2 = lattice.lambda2 * static_cast<double>(q) / static_cast<double>(n2);
      const double c = std::cos(static_cast<double>(j) * lattice.kappa2() * x2);
      for (std::size_t l = 0; l < n3; ++l) prof[l] += c * samples[q][l];
    }
    const double norm = (j == 0 ? 1.0 : 2.0) / static_cast<double>(n2);
    for (auto& x : prof) x *= norm;
    bool keep = false;
    for (double x : prof)
      if (std::abs(x) > 1e-15 * scale) keep = true;
    if (keep) state.u.c1.set_mode(0, j, std::move(prof));
  }
  // The cosine reconstruction must reproduce the samples; a sin component
  // or unresolved content shows up as a mismatch.
  for (std::size_t q = 0; q < n2; ++q) {
    const double x2 = lattice.lambda2 * static_cast<double>(q) / static_cast<double>(n2);
    for (std::size_t l = 0; l < n3; l += std::max<std::size_t>(1, n3 / 8)) {
      const double rec = state.u.c1.eval(0.0, x2, l);
      if (std::abs(rec - U2d(x2, vgrid.nodes[l])) > tol * scale ||
          std::abs(rec - U2d(-x2, vgrid.nodes[l])) > tol * scale)
        throw SymmetryViolation(
            "trivial_state: U2d is not even lambda2-periodic at the sampling resolution");
    }
  }
  return state;
}

inline FlowState trivial_state(const ShearProfile& profile, const LatticeSpec& lattice,
                               const VerticalGrid& vgrid) {
  return trivial_state([&](double, double x3) { return profile.value(x3); }, lattice, vgrid, 8);
}

/// Kernel directions: mean amplitude a0, per-mode amplitudes on N(U) (one
/// entry per sign class, indices (i > 0, j >= 0); the amplitude is the
/// complex-series coefficient a_k, even in k), and the free x1-independent
/// shear perturbation w(x2, x3) (even, lambda2-periodic).
struct KernelModeSet {
  double a0 = 0.0;
  std::vector<std::pair<std::array<int, 2>, double>> modes;
  SpectralField w;  // parity (even, even); only (0, j) keys

  bool has_3d_amplitude() const {
    for (const auto& [idx, a] : modes)
      if (a != 0.0 && idx[1] != 0) return true;
    return false;
  }
};

/// First-order kernel fields per the linear-level analysis.
struct KernelFields {
  SpectralField eta1;
  SpectralField wp1;
  SymmetricVectorField u1;
  SymmetricVectorField v1;  // rotational part: u1 = -curl(U phi1 e2) + v1
};

/// Assemble (eta1, wp1, u1, v1) from resonant modes. Collapsed real
/// amplitudes pick up the sign-class weight W (4 when k2 > 0, 2 when
/// k2 = 0). Every targeted mode must lie in the resonant set.
inline KernelFields assemble_kernel(const ShearProfile& profile, const WaveParams& params,
                                    const ResonantSet& resonant, const KernelModeSet& kset,
                                    const LatticeSpec& lattice, const VerticalGrid& vgrid) {
  KernelFields out;
  out.eta1 = SpectralField(lattice, vgrid);
  out.wp1 = SpectralField(lattice, vgrid);
  out.u1 = SymmetricVectorField(lattice, vgrid);
  out.v1 = SymmetricVectorField(lattice, vgrid);

  const std::size_t n3 = vgrid.size();
  const double d = vgrid.depth;
  std::vector<double> U(n3), dU(n3), lift(n3);
  for (std::size_t l = 0; l < n3; ++l) {
    U[l] = profile.value(vgrid.nodes[l]);
    dU[l] = profile.derivative(vgrid.nodes[l]);
    lift[l] = 1.0 + vgrid.nodes[l] / d;
  }

  if (kset.a0 != 0.0) {
    out.eta1.set_mode_constant(0, 0, kset.a0);
    out.wp1.set_mode_constant(0, 0, params.D(0.0) * kset.a0);
    std::vector<double> prof(n3);
    for (std::size_t l = 0; l < n3; ++l) prof[l] = (dU[l] * lift[l] + U[l] / d) * kset.a0;
    out.u1.c1.set_mode(0, 0, std::move(prof));
  }

  for (const auto& [idx, a] : kset.modes) {
    if (a == 0.0) continue;
    const int i = std::abs(idx[0]), j = std::abs(idx[1]);
    const ResonantMode* mode = resonant.find(i, j);
    if (!mode)
      throw NonResonantMode("assemble_kernel: amplitude targets k = (" + std::to_string(idx[0]) +
                            ", " + std::to_string(idx[1]) + ") outside N(U)");
    if (mode->sol.nodes != vgrid.nodes)
      throw ShapeMismatch("assemble_kernel: resonant modes not solved on the field grid");
    const double W = (j > 0) ? 4.0 : 2.0;
    const double k1 = lattice.kappa1() * static_cast<double>(i);
    const double k2 = lattice.kappa2() * static_cast<double>(j);
    const auto& q = mode->sol.q;
    const auto& Q = mode->Q;

    out.eta1.add_mode(i, j, std::vector<double>(n3, W * a));
    {
      std::vector<double> prof(n3);
      for (std::size_t l = 0; l < n3; ++l) prof[l] = W * a * Q[l];
      out.wp1.add_mode(i, j, prof);
    }
    // v1 = W a Q [(-k, i q)/(U k1) - q U' e1 / (k1^2 U^2)] in collapsed form.
    std::vector<double> v1p(n3), v3p(n3);
    for (std::size_t l = 0; l < n3; ++l) {
      v1p[l] = -W * a * Q[l] * (1.0 / U[l] + q[l] * dU[l] / (k1 * k1 * U[l] * U[l]));
      v3p[l] = -W * a * Q[l] * q[l] / (U[l] * k1);
    }
    out.v1.c1.add_mode(i, j, v1p);
    out.v1.c3.add_mode(i, j, v3p);
    if (j > 0) {
      std::vector<double> v2p(n3);
      for (std::size_t l = 0; l < n3; ++l) v2p[l] = 4.0 * a * k2 * Q[l] / (U[l] * k1);
      out.v1.c2.add_mode(i, j, v2p);
      out.u1.c2.add_mode(i, j, v2p);
    }
    // u1 = -curl(U phi1 e2) + v1 = (d3(U phi1), 0, -U d1 phi1) + v1.
    std::vector<double> u1p(n3), u3p(n3);
    for (std::size_t l = 0; l < n3; ++l) {
      u1p[l] = W * a * (dU[l] * lift[l] + U[l] / d) + v1p[l];
      u3p[l] = W * a * k1 * U[l] * lift[l] + v3p[l];
    }
    out.u1.c1.add_mode(i, j, u1p);
    out.u1.c3.add_mode(i, j, u3p);
  }

  // The k1 = 0 sector is free: w rides on the first component only.
  for (const auto& [key, prof] : kset.w.modes) {
    if (key.i != 0)
      throw std::invalid_argument("assemble_kernel: w must be independent of x1");
    if (prof.size() != n3) throw ShapeMismatch("assemble_kernel: w profile size mismatch");
    out.u1.c1.add_mode(0, key.j, prof);
    out.v1.c1.add_mode(0, key.j, prof);
  }
  return out;
}

/// trivial + eps * kernel, the probe state of the expansion.
inline FlowState perturbed_state(const FlowState& trivial, const KernelFields& kernel,
                                 double eps) {
  FlowState state = trivial;
  state.u.axpy(eps, kernel.u1);
  state.wp.axpy(eps, kernel.wp1);
  state.eta.axpy(eps, kernel.eta1);
  return state;
}

}  // namespace shearwave
