#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <vector>

#include "shearwave/errors.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/riccati.hpp"
#include "shearwave/util.hpp"

namespace shearwave {

/// Memoizes Riccati solves by (profile hash, |k|^2, tol, output grid).
/// q depends on k only through |k|^2, which also makes the cache hit all
/// four sign copies of a mode. Safe for concurrent use.
class RiccatiCache {
 public:
  RiccatiSolution get(const ShearProfile& profile, const std::array<double, 2>& k,
                      double tol, const std::vector<double>& nodes) {
    std::uint64_t key = profile.content_hash();
    key = hash_double(k[0] * k[0] + k[1] * k[1], key);
    key = hash_double(tol, key);
    key = hash_doubles(nodes, key);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) {
        RiccatiSolution sol = it->second;
        sol.k = k;
        return sol;
      }
    }
    RiccatiSolution sol = solve_riccati(profile, k, tol, nodes);
    {
      std::lock_guard<std::mutex> lock(mutex_);
      cache_.emplace(key, sol);
    }
    sol.k = k;
    return sol;
  }

 private:
  std::mutex mutex_;
  std::map<std::uint64_t, RiccatiSolution> cache_;
};

namespace detail {

inline RiccatiSolution q_solution(const ShearProfile& profile, const std::array<double, 2>& k,
                                  double tol, const std::vector<double>& nodes,
                                  RiccatiCache* cache) {
  if (cache) return cache->get(profile, k, tol, nodes);
  return solve_riccati(profile, k, tol, nodes);
}

}  // namespace detail

/// Signed dispersion residual q_k(0) - k1^2 U(0)^2 / D(|k|^2).
/// Positive means q is too large for resonance.
inline double dispersion_residual(const ShearProfile& profile, const WaveParams& params,
                                  const std::array<double, 2>& k, double tol = 1e-10,
                                  RiccatiCache* cache = nullptr,
                                  const std::vector<double>& nodes = {}) {
  if (k[0] == 0.0)
    throw ZeroFirstComponent("dispersion_residual: k1 = 0 carries no dispersion relation");
  const double k2 = k[0] * k[0] + k[1] * k[1];
  const double u0 = profile.value(0.0);
  const auto out = nodes.empty() ? linspace(-profile.depth(), 0.0, 129) : nodes;
  const auto sol = detail::q_solution(profile, k, tol, out, cache);
  return sol.q_surface - k[0] * k[0] * u0 * u0 / params.D(k2);
}

/// Conservative radius R beyond which no lattice wavevector can satisfy the
/// dispersion relation: the explicit tanh lower bound for q(0) already
/// exceeds the largest possible right-hand side U(0)^2 |k|^2 / D(|k|^2).
inline double kernel_cutoff_radius(const ShearProfile& profile, const WaveParams& params,
                                   const LatticeSpec& lattice) {
  const double d = profile.depth();
  const double u0 = profile.value(0.0);
  const double m_inf = logderiv_extrema(profile).first;

  // Supremum of the RHS bound over a generous radius range.
  const double rho_max = 1e4 * std::max(1.0, 1.0 / d);
  double rhs_sup = 0.0;
  double rho = 1e-3 * std::min(lattice.kappa1(), lattice.kappa2());
  const double factor = std::pow(rho_max / rho, 1.0 / 4095.0);
  for (int i = 0; i < 4096; ++i, rho *= factor)
    rhs_sup = std::max(rhs_sup, u0 * u0 * rho * rho / params.D(rho * rho));
  const double target = 1.01 * rhs_sup + 1e-14 * std::max(1.0, rhs_sup);

  auto lower_at = [&](double r) { return RiccatiBound{r, m_inf, d}(0.0); };
  if (lower_at(rho_max) <= target)
    throw std::runtime_error(
        "kernel_cutoff_radius: dynamic condition too weak, no cutoff below scan bound");

  double lo = 0.0, hi = std::min(lattice.kappa1(), lattice.kappa2());
  while (lower_at(hi) <= target) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lower_at(mid) > target ? hi : lo) = mid;
  }
  return hi;
}

struct ResonantMode {
  std::array<int, 2> index{0, 0};   // lattice multiples (i, j)
  std::array<double, 2> k{0.0, 0.0};
  double q_surface = 0.0;
  double residual = 0.0;
  RiccatiSolution sol;
  std::vector<double> Q;  // pressure profile on sol.nodes
};

/// The finite set N(U) of nonzero lattice wavevectors satisfying the
/// dispersion relation within membership_tol, with per-mode q and Q data.
/// Closed under sign flips; every member has k1 != 0.
struct ResonantSet {
  std::vector<ResonantMode> modes;
  double cutoff_radius = 0.0;
  double membership_tol = 0.0;

  /// Lookup by |i|, |j| (amplitudes are (+)-symmetric in k).
  const ResonantMode* find(int i, int j) const {
    for (const auto& m : modes)
      if (std::abs(m.index[0]) == std::abs(i) && std::abs(m.index[1]) == std::abs(j) &&
          m.index[0] > 0 && m.index[1] >= 0)
        return &m;
    return nullptr;
  }

  bool empty() const { return modes.empty(); }
};

/// Enumerate all k in the dual lattice with 0 < |k| <= cutoff and k1 != 0,
/// keeping those with |dispersion residual| <= membership_tol. Ordering is
/// lexicographic by (|k|, k1, k2); an empty set is a legitimate result.
inline ResonantSet find_kernel_set(const ShearProfile& profile, const WaveParams& params,
                                   const LatticeSpec& lattice, double membership_tol = 1e-8,
                                   double tol = 1e-10, std::vector<double> nodes = {},
                                   RiccatiCache* cache = nullptr) {
  ResonantSet set;
  set.membership_tol = membership_tol;
  set.cutoff_radius = kernel_cutoff_radius(profile, params, lattice);
  if (nodes.empty()) nodes = linspace(-profile.depth(), 0.0, 129);

  const int imax = static_cast<int>(std::floor(set.cutoff_radius / lattice.kappa1()));
  const int jmax = static_cast<int>(std::floor(set.cutoff_radius / lattice.kappa2()));
  std::vector<std::array<int, 2>> candidates;
  for (int i = -imax; i <= imax; ++i) {
    if (i == 0) continue;
    for (int j = -jmax; j <= jmax; ++j) {
      const auto k = lattice.wavevector(i, j);
      if (std::hypot(k[0], k[1]) <= set.cutoff_radius) candidates.push_back({i, j});
    }
  }

  RiccatiCache local_cache;
  RiccatiCache* use_cache = cache ? cache : &local_cache;
  const double u0 = profile.value(0.0);
  std::vector<std::optional<ResonantMode>> hits(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t n) {
    const auto [i, j] = candidates[n];
    const auto k = lattice.wavevector(i, j);
    auto sol = use_cache->get(profile, k, tol, nodes);
    const double res = sol.q_surface - k[0] * k[0] * u0 * u0 / params.D(k[0] * k[0] + k[1] * k[1]);
    if (std::abs(res) <= membership_tol) {
      ResonantMode mode;
      mode.index = {i, j};
      mode.k = k;
      mode.q_surface = sol.q_surface;
      mode.residual = res;
      mode.Q = pressure_profile(sol, u0);
      mode.sol = std::move(sol);
      hits[n] = std::move(mode);
    }
  });
  for (auto& h : hits)
    if (h) set.modes.push_back(std::move(*h));
  std::sort(set.modes.begin(), set.modes.end(), [](const ResonantMode& a, const ResonantMode& b) {
    const double na = std::hypot(a.k[0], a.k[1]), nb = std::hypot(b.k[0], b.k[1]);
    if (na != nb) return na < nb;
    if (a.k[0] != b.k[0]) return a.k[0] < b.k[0];
    return a.k[1] < b.k[1];
  });
  return set;
}

/// Invert the dispersion relation for sigma so that target_k becomes
/// resonant: sigma = (k1^2 U(0)^2 / q_k(0) - g) / |k|^2.
inline double calibrate_sigma(const ShearProfile& profile, double g, const LatticeSpec& lattice,
                              const std::array<int, 2>& target_index, double tol = 1e-10,
                              RiccatiCache* cache = nullptr,
                              const std::vector<double>& nodes = {}) {
  const auto k = lattice.wavevector(target_index[0], target_index[1]);
  if (k[0] == 0.0) throw ZeroFirstComponent("calibrate_sigma: target must have k1 != 0");
  const auto out = nodes.empty() ? linspace(-profile.depth(), 0.0, 129) : nodes;
  const auto sol = detail::q_solution(profile, k, tol, out, cache);
  const double u0 = profile.value(0.0);
  const double numerator = k[0] * k[0] * u0 * u0 / sol.q_surface - g;
  if (!(numerator > 0.0))
    throw NotCapillary("calibrate_sigma: computed sigma <= 0; lower g or speed up the flow");
  return numerator / (k[0] * k[0] + k[1] * k[1]);
}

/// q_k(0) along a list of k2 values at fixed k1; strictly increasing in
/// k2^2 for any valid profile.
inline std::vector<double> monotonicity_scan(const ShearProfile& profile, double k1,
                                             const std::vector<double>& k2_list,
                                             double tol = 1e-10) {
  std::vector<double> out;
  out.reserve(k2_list.size());
  for (const double k2 : k2_list)
    out.push_back(solve_riccati(profile, {k1, k2}, tol).q_surface);
  return out;
}

}  // namespace shearwave
