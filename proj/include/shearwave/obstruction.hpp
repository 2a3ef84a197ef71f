#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "shearwave/dispersion.hpp"
#include "shearwave/fields.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/spectral.hpp"

namespace shearwave {

namespace detail {

struct ContributingMode {
  std::array<int, 2> index;
  double a = 0.0;
  double k1 = 0.0, k2 = 0.0;
  std::vector<double> q, Q;  // on the working nodes
};

/// Modes of the kernel set with k2 > 0 and a != 0, i.e. the N(U)+ part.
inline std::vector<ContributingMode> positive_quadrant_modes(const ResonantSet& resonant,
                                                             const KernelModeSet& kset,
                                                             const LatticeSpec& lattice) {
  std::vector<ContributingMode> out;
  for (const auto& [idx, a] : kset.modes) {
    if (a == 0.0 || idx[1] == 0) continue;
    const int i = std::abs(idx[0]), j = std::abs(idx[1]);
    const ResonantMode* mode = resonant.find(i, j);
    if (!mode)
      throw NonResonantMode("obstruction: amplitude targets a mode outside N(U)");
    ContributingMode m;
    m.index = {i, j};
    m.a = a;
    m.k1 = lattice.kappa1() * i;
    m.k2 = lattice.kappa2() * j;
    m.q = mode->sol.q;
    m.Q = mode->Q;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace detail

/// The three x1-averaged bilinears of the quadratic level, both as grid
/// averages of the assembled v1 and as their closed-form mode sums
///   <v2 v3>       = -4 sum a^2 k2 Q^2 q   / (k1^2 U^2) sin(2 k2 x2)
///   d2 <v3^2>     = -8 sum a^2 k2 Q^2 q^2 / (k1^2 U^2) sin(2 k2 x2)
///   d2 <v2^2>     =  8 sum a^2 k2^3 Q^2   / (k1^2 U^2) sin(2 k2 x2).
/// Rows run over x2, columns over x3.
struct BilinearAverages {
  Grid2D v2v3_grid, d2_v3sq_grid, d2_v2sq_grid;
  Grid2D v2v3_closed, d2_v3sq_closed, d2_v2sq_closed;

  double max_mismatch() const {
    double m = 0.0;
    for (std::size_t n = 0; n < v2v3_grid.v.size(); ++n) {
      m = std::max(m, std::abs(v2v3_grid.v[n] - v2v3_closed.v[n]));
      m = std::max(m, std::abs(d2_v3sq_grid.v[n] - d2_v3sq_closed.v[n]));
      m = std::max(m, std::abs(d2_v2sq_grid.v[n] - d2_v2sq_closed.v[n]));
    }
    return m;
  }
};

inline BilinearAverages averaged_bilinears(const SymmetricVectorField& v1,
                                           const ShearProfile& profile,
                                           const ResonantSet& resonant,
                                           const KernelModeSet& kset, std::size_t n1,
                                           std::size_t n2) {
  const auto& lattice = v1.c2.lattice;
  const auto& vgrid = v1.c2.vgrid;
  const std::size_t n3 = vgrid.size();

  const Grid3D g2 = synthesize(v1.c2, n1, n2);
  const Grid3D g3 = synthesize(v1.c3, n1, n2);

  BilinearAverages out;
  out.v2v3_grid = x1_average(pointwise_product(g2, g3));
  out.d2_v3sq_grid =
      averaged_derivative(x1_average(pointwise_product(g3, g3)), 2, lattice, vgrid);
  out.d2_v2sq_grid =
      averaged_derivative(x1_average(pointwise_product(g2, g2)), 2, lattice, vgrid);

  out.v2v3_closed = Grid2D(n2, n3);
  out.d2_v3sq_closed = Grid2D(n2, n3);
  out.d2_v2sq_closed = Grid2D(n2, n3);
  const auto modes = detail::positive_quadrant_modes(resonant, kset, lattice);
  for (std::size_t q = 0; q < n2; ++q) {
    const double x2 = lattice.lambda2 * static_cast<double>(q) / static_cast<double>(n2);
    for (std::size_t l = 0; l < n3; ++l) {
      const double U = profile.value(vgrid.nodes[l]);
      double s_v2v3 = 0.0, s_v3sq = 0.0, s_v2sq = 0.0;
      for (const auto& m : modes) {
        const double common =
            m.a * m.a * m.Q[l] * m.Q[l] / (m.k1 * m.k1 * U * U) * std::sin(2.0 * m.k2 * x2);
        s_v2v3 += -4.0 * m.k2 * m.q[l] * common;
        s_v3sq += -8.0 * m.k2 * m.q[l] * m.q[l] * common;
        s_v2sq += 8.0 * m.k2 * m.k2 * m.k2 * common;
      }
      out.v2v3_closed.at(q, l) = s_v2v3;
      out.d2_v3sq_closed.at(q, l) = s_v3sq;
      out.d2_v2sq_closed.at(q, l) = s_v2sq;
    }
  }
  return out;
}

/// The x1-averaged solvability expression
///   <(d2^2 - d3^2)(v2 v3) + d2 d3 (v3^2 - v2^2)>,
/// evaluated on the grid and via the Riccati-reduced closed form
///   -8 (U'/U^3) sum a^2 (k2/k1^2) Q^2 (k1^2 - k2^2 + q^2) sin(2 k2 x2).
struct SolvabilityAverage {
  Grid2D numeric, closed;

  double max_mismatch() const {
    double m = 0.0;
    for (std::size_t n = 0; n < numeric.v.size(); ++n)
      m = std::max(m, std::abs(numeric.v[n] - closed.v[n]));
    return m;
  }
};

inline SolvabilityAverage solvability_average(const SymmetricVectorField& v1,
                                              const ShearProfile& profile,
                                              const ResonantSet& resonant,
                                              const KernelModeSet& kset, std::size_t n1,
                                              std::size_t n2) {
  const auto& lattice = v1.c2.lattice;
  const auto& vgrid = v1.c2.vgrid;
  const std::size_t n3 = vgrid.size();

  const Grid3D g2 = synthesize(v1.c2, n1, n2);
  const Grid3D g3 = synthesize(v1.c3, n1, n2);
  const Grid2D v2v3 = x1_average(pointwise_product(g2, g3));
  const Grid2D v3sq = x1_average(pointwise_product(g3, g3));
  const Grid2D v2sq = x1_average(pointwise_product(g2, g2));

  auto d2 = [&](const Grid2D& g) { return averaged_derivative(g, 2, lattice, vgrid); };
  auto d3 = [&](const Grid2D& g) { return averaged_derivative(g, 3, lattice, vgrid); };

  SolvabilityAverage out;
  const Grid2D t1 = d2(d2(v2v3));
  const Grid2D t2 = d3(d3(v2v3));
  Grid2D diff(v3sq.rows, v3sq.cols);
  for (std::size_t n = 0; n < diff.v.size(); ++n) diff.v[n] = v3sq.v[n] - v2sq.v[n];
  const Grid2D t3 = d2(d3(diff));
  out.numeric = Grid2D(n2, n3);
  for (std::size_t n = 0; n < out.numeric.v.size(); ++n)
    out.numeric.v[n] = t1.v[n] - t2.v[n] + t3.v[n];

  out.closed = Grid2D(n2, n3);
  const auto modes = detail::positive_quadrant_modes(resonant, kset, lattice);
  for (std::size_t q = 0; q < n2; ++q) {
    const double x2 = lattice.lambda2 * static_cast<double>(q) / static_cast<double>(n2);
    for (std::size_t l = 0; l < n3; ++l) {
      const double U = profile.value(vgrid.nodes[l]);
      const double dU = profile.derivative(vgrid.nodes[l]);
      double acc = 0.0;
      for (const auto& m : modes) {
        const double qq = m.q[l];
        acc += m.a * m.a * (m.k2 / (m.k1 * m.k1)) * m.Q[l] * m.Q[l] *
               (m.k1 * m.k1 - m.k2 * m.k2 + qq * qq) * std::sin(2.0 * m.k2 * x2);
      }
      out.closed.at(q, l) = -8.0 * dU / (U * U * U) * acc;
    }
  }
  return out;
}

/// The obstruction function
///   f = sum over N(U)+ of a^2 (k2^2/k1^2) Q^2 (k1^2 - k2^2 + q^2)
/// and its Riccati-derived derivative
///   f' = 4 sum a^2 (k2^2/k1^2) Q^2 q (k1^2 + (U'/U) q),
/// sampled on a dense uniform vertical grid.
struct ObstructionProfile {
  std::vector<double> nodes;
  std::vector<double> f, f_prime, u_prime_f;
  std::vector<std::pair<std::array<int, 2>, double>> mode_peaks;  // max |f contribution|
  double positivity_delta = 0.0;  // f' > 0 on (-d, -d + delta]
};

inline ObstructionProfile obstruction_f(const ShearProfile& profile, const ResonantSet& resonant,
                                        const KernelModeSet& kset, const LatticeSpec& lattice,
                                        std::size_t n_nodes = 2049, double tol = 1e-10) {
  const double d = profile.depth();
  ObstructionProfile out;
  out.nodes = linspace(-d, 0.0, n_nodes);
  out.f.assign(n_nodes, 0.0);
  out.f_prime.assign(n_nodes, 0.0);
  out.u_prime_f.assign(n_nodes, 0.0);

  // Re-solve contributing modes on the dense nodes.
  std::vector<detail::ContributingMode> modes;
  for (const auto& [idx, a] : kset.modes) {
    if (a == 0.0 || idx[1] == 0) continue;
    const int i = std::abs(idx[0]), j = std::abs(idx[1]);
    if (!resonant.find(i, j))
      throw NonResonantMode("obstruction_f: amplitude targets a mode outside N(U)");
    detail::ContributingMode m;
    m.index = {i, j};
    m.a = a;
    m.k1 = lattice.kappa1() * i;
    m.k2 = lattice.kappa2() * j;
    const auto sol = solve_riccati(profile, {m.k1, m.k2}, tol, out.nodes);
    m.Q = pressure_profile(sol, profile.value(0.0));
    m.q = sol.q;
    modes.push_back(std::move(m));
  }

  for (const auto& m : modes) {
    const double c = m.a * m.a * m.k2 * m.k2 / (m.k1 * m.k1);
    double peak = 0.0;
    for (std::size_t l = 0; l < n_nodes; ++l) {
      const double mlog = profile.log_derivative(out.nodes[l]);
      const double term = c * m.Q[l] * m.Q[l] * (m.k1 * m.k1 - m.k2 * m.k2 + m.q[l] * m.q[l]);
      out.f[l] += term;
      out.f_prime[l] +=
          4.0 * c * m.Q[l] * m.Q[l] * m.q[l] * (m.k1 * m.k1 + mlog * m.q[l]);
      peak = std::max(peak, std::abs(term));
    }
    out.mode_peaks.push_back({m.index, peak});
  }
  for (std::size_t l = 0; l < n_nodes; ++l)
    out.u_prime_f[l] = profile.derivative(out.nodes[l]) * out.f[l];

  // Largest prefix interval adjoining x3 = -d on which f' stays positive.
  std::size_t l = 1;
  while (l < n_nodes && out.f_prime[l] > 0.0) ++l;
  out.positivity_delta = (l > 1) ? out.nodes[l - 1] + d : 0.0;
  return out;
}

enum class Verdict { uniform_flow, kernel_2d_only, obstructed_3d };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::uniform_flow: return "UNIFORM_FLOW";
    case Verdict::kernel_2d_only: return "KERNEL_2D_ONLY";
    default: return "OBSTRUCTED_3D";
  }
}

struct VerdictRecord {
  Verdict classification = Verdict::kernel_2d_only;
  double max_abs_uprime = 0.0;
  double max_abs_f = 0.0;
  double max_abs_uprime_f = 0.0;
  double ratio = 0.0;  // max|U'f| / (max|U'| max|f|)
  double positivity_threshold = 0.01;
  double positivity_delta = 0.0;
  bool obstruction_nonvanishing = false;
  ObstructionProfile profile_data;
  ResonantSet resonant;
};

struct VerdictOptions {
  double membership_tol = 1e-8;
  double ode_tol = 1e-10;
  double uniform_tol = 1e-10;       // threshold on max|U'|
  double positivity_threshold = 0.01;
  std::size_t f_nodes = 2049;
};

/// Classify the configuration:
///   UNIFORM_FLOW    max|U'| below tolerance; the obstruction is vacuous
///   KERNEL_2D_ONLY  no 3D amplitude rides on N(U)+
///   OBSTRUCTED_3D   non-constant U with a 3D resonant amplitude; U'f must
///                   not vanish identically, which forces 2D waves.
inline VerdictRecord theorem_verdict(const ShearProfile& profile, const WaveParams& params,
                                     const LatticeSpec& lattice, const KernelModeSet& kset,
                                     const VerdictOptions& opts = {}) {
  VerdictRecord rec;
  rec.positivity_threshold = opts.positivity_threshold;

  const auto report = validate_profile(profile);
  if (!report.zero_free)
    throw std::invalid_argument("theorem_verdict: profile must be zero-free");
  rec.max_abs_uprime = report.max_abs_derivative;

  rec.resonant = find_kernel_set(profile, params, lattice, opts.membership_tol, opts.ode_tol);
  // Amplitudes must target resonant modes even before classification.
  for (const auto& [idx, a] : kset.modes) {
    if (a == 0.0) continue;
    if (!rec.resonant.find(std::abs(idx[0]), std::abs(idx[1])))
      throw NonResonantMode("theorem_verdict: amplitude targets a mode outside N(U)");
  }

  const bool has_3d = kset.has_3d_amplitude();
  if (has_3d) {
    rec.profile_data = obstruction_f(profile, rec.resonant, kset, lattice, opts.f_nodes,
                                     opts.ode_tol);
    for (std::size_t l = 0; l < rec.profile_data.nodes.size(); ++l) {
      rec.max_abs_f = std::max(rec.max_abs_f, std::abs(rec.profile_data.f[l]));
      rec.max_abs_uprime_f =
          std::max(rec.max_abs_uprime_f, std::abs(rec.profile_data.u_prime_f[l]));
    }
    rec.positivity_delta = rec.profile_data.positivity_delta;
  }

  if (rec.max_abs_uprime <= opts.uniform_tol) {
    rec.classification = Verdict::uniform_flow;
    return rec;
  }
  if (!has_3d) {
    rec.classification = Verdict::kernel_2d_only;
    return rec;
  }
  rec.classification = Verdict::obstructed_3d;
  rec.ratio = rec.max_abs_uprime_f / (rec.max_abs_uprime * rec.max_abs_f);
  rec.obstruction_nonvanishing = rec.ratio > opts.positivity_threshold;
  return rec;
}

}  // namespace shearwave
