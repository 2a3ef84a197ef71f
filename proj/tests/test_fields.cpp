#include <doctest.h>

#include <cmath>

#include "shearwave/fields.hpp"
#include "shearwave/residuals.hpp"

using namespace shearwave;

namespace {
const LatticeSpec lat(two_pi, two_pi);
}

TEST_CASE("build_flattening basics") {
  const auto vg = VerticalGrid::chebyshev(9, 1.0);
  SUBCASE("eta == 0: phi = 0, rho = 1, M = I") {
    SpectralField eta(lat, vg);
    const auto f = build_flattening(eta, 8, 8);
    CHECK(f.phi.max_abs() == 0.0);
    for (const double r : f.rho.v) CHECK(r == 1.0);
    for (int r = 1; r <= 3; ++r)
      for (int c = 1; c <= 3; ++c) {
        const auto entry = f.entry(r, c);
        const double expect = (r == c) ? 1.0 : 0.0;
        for (const double v : entry.v) CHECK(v == doctest::Approx(expect));
      }
  }
  SUBCASE("constant eta: rho = 1 + c/d uniformly") {
    SpectralField eta(lat, vg);
    eta.set_mode_constant(0, 0, 0.3);
    const auto f = build_flattening(eta, 8, 8);
    for (const double r : f.rho.v) CHECK(r == doctest::Approx(1.3).epsilon(1e-14));
  }
  SUBCASE("deep trough degenerates") {
    SpectralField eta(lat, vg);
    eta.set_mode_constant(0, 0, -1.2);
    CHECK_THROWS_AS(build_flattening(eta, 8, 8), DegenerateSurface);
  }
}

TEST_CASE("M = I + eps M1 + O(eps^2) (slope fit over an eps sweep)") {
  const auto vg = VerticalGrid::chebyshev(9, 1.0);
  SpectralField eta1(lat, vg);
  eta1.set_mode_constant(1, 0, 1.0);
  std::vector<double> eps_list{1e-2, 5e-3, 2.5e-3, 1.25e-3};
  std::vector<double> lx, ly;
  for (const double eps : eps_list) {
    const auto f = build_flattening(eta1.scaled(eps), 16, 16);
    double err = 0.0;
    for (int r = 1; r <= 3; ++r)
      for (int c = 1; c <= 3; ++c) {
        const auto entry = f.entry(r, c);
        const auto m1 = first_order_jacobian_entry(eta1, 16, 16, r, c);
        for (std::size_t n = 0; n < entry.v.size(); ++n) {
          const double lin = (r == c ? 1.0 : 0.0) + eps * m1.v[n];
          err = std::max(err, std::abs(entry.v[n] - lin));
        }
      }
    lx.push_back(std::log(eps));
    ly.push_back(std::log(err));
  }
  CHECK(fit_slope(lx, ly) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("pushforward of vectors") {
  const auto vg = VerticalGrid::chebyshev(17, 1.0);
  SUBCASE("flat surface is the identity map") {
    SpectralField eta(lat, vg);
    auto v = [](double x1, double x2, double x3) -> std::array<double, 3> {
      return {std::cos(x1), std::sin(x2) * x3, x3 * x3};
    };
    const auto flat = pushforward_vector(v, eta, 8, 8);
    const Grid3D probe(lat, vg, 8, 8);
    for (std::size_t p = 0; p < 8; ++p)
      for (std::size_t q = 0; q < 8; ++q)
        for (std::size_t l = 0; l < vg.size(); ++l) {
          const auto w = v(probe.x1(p), probe.x2(q), probe.x3(l));
          CHECK(flat[0].at(p, q, l) == doctest::Approx(w[0]).epsilon(1e-14));
          CHECK(flat[1].at(p, q, l) == doctest::Approx(w[1]).epsilon(1e-14));
          CHECK(flat[2].at(p, q, l) == doctest::Approx(w[2]).epsilon(1e-14));
        }
  }
  SUBCASE("divergence-free fields stay divergence-free (curl oracle)") {
    SpectralField eta(lat, vg);
    eta.set_mode_constant(1, 1, 0.05);
    // v = curl A for A = (sin(x2)cos(pi x3), 0, cos(x1)): exactly
    // divergence-free and doubly periodic.
    auto v = [](double x1, double x2, double x3) -> std::array<double, 3> {
      return {0.0, -M_PI * std::sin(x2) * std::sin(M_PI * x3) + std::sin(x1),
              -std::cos(x2) * std::cos(M_PI * x3)};
    };
    const auto flat = pushforward_vector(v, eta, 32, 32);
    Grid3D div = grid_derivative(flat[0], 1);
    const Grid3D d2 = grid_derivative(flat[1], 2);
    const Grid3D d3 = grid_derivative(flat[2], 3);
    for (std::size_t n = 0; n < div.v.size(); ++n) div.v[n] += d2.v[n] + d3.v[n];
    CHECK(div.max_abs() < 1e-10);
  }
  SUBCASE("pullback inverts pushforward at the nodes") {
    SpectralField eta(lat, vg);
    eta.set_mode_constant(1, 0, 0.1);
    auto v = [](double x1, double x2, double x3) -> std::array<double, 3> {
      return {std::cos(x1) + x3, std::sin(x2), std::cos(x2) * x3};
    };
    const auto flat = pushforward_vector(v, eta, 16, 16);
    const auto back = pullback_vector(flat, eta);
    const auto f = build_flattening(eta, 16, 16);
    double err = 0.0;
    for (std::size_t p = 0; p < 16; ++p)
      for (std::size_t q = 0; q < 16; ++q)
        for (std::size_t l = 0; l < vg.size(); ++l) {
          const auto w = v(flat[0].x1(p), flat[0].x2(q), flat[0].x3(l) + f.phi.at(p, q, l));
          for (int c = 0; c < 3; ++c) err = std::max(err, std::abs(back[c].at(p, q, l) - w[c]));
        }
    CHECK(err < 1e-10);
  }
}

TEST_CASE("trivial_state") {
  const auto vg = VerticalGrid::chebyshev(17, 1.0);
  SUBCASE("depth-only background") {
    const auto profile = ShearProfile::polynomial({2.0, 1.0}, 1.0);
    const auto state = trivial_state(profile, lat, vg);
    CHECK(state.wp.empty());
    CHECK(state.eta.empty());
    CHECK(state.u.c2.empty());
    CHECK(state.u.c3.empty());
    for (std::size_t l = 0; l < vg.size(); ++l)
      CHECK(state.u.c1.eval(0.3, 0.9, l) ==
            doctest::Approx(profile.value(vg.nodes[l])).epsilon(1e-13));
  }
  SUBCASE("even x2-dependent background is accepted") {
    const auto state = trivial_state(
        [&](double x2, double) { return std::cos(lat.kappa2() * x2); }, lat, vg, 32);
    CHECK(state.u.c1.modes.count({0, 1}) == 1);
  }
  SUBCASE("odd background is rejected") {
    CHECK_THROWS_AS(trivial_state([&](double x2, double) { return std::sin(lat.kappa2() * x2); },
                                  lat, vg, 32),
                    SymmetryViolation);
  }
}

TEST_CASE("assemble_kernel") {
  const auto vg = VerticalGrid::chebyshev(33, 1.0);
  const auto profile = ShearProfile::polynomial({2.0, 1.0}, 1.0);
  const double g = 1.0;

  SUBCASE("all amplitudes zero gives all-zero fields") {
    const double sigma = calibrate_sigma(profile, g, lat, {1, 1});
    const WaveParams params(g, sigma);
    const auto set = find_kernel_set(profile, params, lat, 1e-8, 1e-10, vg.nodes);
    KernelModeSet kset;
    kset.w = SpectralField(lat, vg);
    const auto kf = assemble_kernel(profile, params, set, kset, lat, vg);
    CHECK(kf.eta1.empty());
    CHECK(kf.wp1.empty());
    CHECK(kf.u1.c1.empty());
    CHECK(kf.v1.c3.empty());
  }

  SUBCASE("a0 only: eta1 = a0, wp1 = g a0, u1 = -curl(U phi1 e2)") {
    const WaveParams params(g, 0.5);
    const auto set = find_kernel_set(profile, params, lat, 1e-8, 1e-10, vg.nodes);
    KernelModeSet kset;
    kset.a0 = 1.0;
    kset.w = SpectralField(lat, vg);
    const auto kf = assemble_kernel(profile, params, set, kset, lat, vg);
    CHECK(kf.eta1.modes.at({0, 0}).front() == doctest::Approx(1.0));
    CHECK(kf.wp1.modes.at({0, 0}).front() == doctest::Approx(g));
    CHECK(kf.u1.c3.empty());
    // u1 component 1 profile is d3(U (1 + x3/d)).
    const auto& prof = kf.u1.c1.modes.at({0, 0});
    for (std::size_t l = 0; l < vg.size(); ++l) {
      const double x = vg.nodes[l];
      const double expect = 1.0 * (1.0 + x) + (2.0 + x);  // U'(1+x/d) + U/d
      CHECK(prof[l] == doctest::Approx(expect).epsilon(1e-13));
    }
    const auto lin = linear_residual(kf, profile, params);
    CHECK(lin.aggregate.overall_max() < 1e-10);
  }

  SUBCASE("single calibrated 2D mode: x2-independent, small linear residual") {
    const double sigma = calibrate_sigma(profile, g, lat, {1, 0});
    const WaveParams params(g, sigma);
    const auto set = find_kernel_set(profile, params, lat, 1e-8, 1e-10, vg.nodes);
    KernelModeSet kset;
    kset.modes = {{{1, 0}, 1.0}};
    kset.w = SpectralField(lat, vg);
    const auto kf = assemble_kernel(profile, params, set, kset, lat, vg);
    for (const auto& [key, _] : kf.u1.c1.modes) CHECK(key.j == 0);
    CHECK(kf.u1.c2.empty());
    const auto lin = linear_residual(kf, profile, params);
    CHECK(lin.aggregate.overall_max() < 1e-8);
    // kinematic boundary values vanish identically
    CHECK(lin.aggregate.kinematic_top_max < 1e-10);
    CHECK(lin.aggregate.kinematic_bottom_max < 1e-12);
    // both u1 and the rotational part v1 are divergence-free in spectral form
    CHECK(synthesize(kf.u1.divergence(), 16, 16).max_abs() < 1e-8);
    CHECK(synthesize(kf.v1.divergence(), 16, 16).max_abs() < 1e-8);
  }

  SUBCASE("non-resonant amplitude throws") {
    const WaveParams params(g, 0.5);
    const auto set = find_kernel_set(profile, params, lat, 1e-8, 1e-10, vg.nodes);
    KernelModeSet kset;
    kset.modes = {{{1, 1}, 1.0}};
    kset.w = SpectralField(lat, vg);
    CHECK_THROWS_AS(assemble_kernel(profile, params, set, kset, lat, vg), NonResonantMode);
  }

  SUBCASE("wp1 boundary data: wp'(0) = k1^2 U(0)^2 eta, wp'(-d) = 0, wp(0) = D eta") {
    const double sigma = calibrate_sigma(profile, g, lat, {1, 1});
    const WaveParams params(g, sigma);
    const auto set = find_kernel_set(profile, params, lat, 1e-8, 1e-10, vg.nodes);
    KernelModeSet kset;
    kset.modes = {{{1, 1}, 1.0}};
    kset.w = SpectralField(lat, vg);
    const auto kf = assemble_kernel(profile, params, set, kset, lat, vg);
    const auto& p = kf.wp1.modes.at({1, 1});
    const double eta_amp = kf.eta1.modes.at({1, 1}).front();
    const auto dp = vg.derivative(p);
    const double u0 = profile.value(0.0);
    CHECK(dp.back() == doctest::Approx(1.0 * u0 * u0 * eta_amp).epsilon(1e-8));
    CHECK(std::abs(dp.front()) < 1e-8);
    CHECK(p.back() == doctest::Approx((g + sigma * 2.0) * eta_amp).epsilon(1e-9));
  }

  SUBCASE("w rides the k1 = 0 sector of u1 and v1") {
    const WaveParams params(g, 0.5);
    const auto set = find_kernel_set(profile, params, lat, 1e-8, 1e-10, vg.nodes);
    KernelModeSet kset;
    kset.w = SpectralField(lat, vg);
    kset.w.set_mode_constant(0, 1, 0.7);
    const auto kf = assemble_kernel(profile, params, set, kset, lat, vg);
    CHECK(kf.u1.c1.modes.at({0, 1}).front() == doctest::Approx(0.7));
    CHECK(kf.v1.c1.modes.at({0, 1}).front() == doctest::Approx(0.7));
    const auto lin = linear_residual(kf, profile, params);
    CHECK(lin.aggregate.overall_max() < 1e-12);
  }
}
