#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shearwave/errors.hpp"
#include "shearwave/util.hpp"

namespace shearwave {

/// Doubly-periodic box: wavelengths lambda_i, dual wavenumbers kappa_i = 2*pi/lambda_i.
/// The kappas are always derived, never stored.
struct LatticeSpec {
  double lambda1 = two_pi;
  double lambda2 = two_pi;

  LatticeSpec() = default;
  LatticeSpec(double l1, double l2) : lambda1(l1), lambda2(l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0))
      throw std::invalid_argument("LatticeSpec: wavelengths must be positive");
  }

  double kappa1() const { return two_pi / lambda1; }
  double kappa2() const { return two_pi / lambda2; }

  /// Dual-lattice point (i*kappa1, j*kappa2).
  std::array<double, 2> wavevector(int i, int j) const {
    return {static_cast<double>(i) * kappa1(), static_cast<double>(j) * kappa2()};
  }

  bool operator==(const LatticeSpec&) const = default;
};

namespace detail {

// Not-a-knot cubic spline through (x_i, y_i); stores second derivatives.
struct CubicSpline {
  std::vector<double> x, y, m;

  CubicSpline() = default;
  CubicSpline(std::vector<double> xs, std::vector<double> ys)
      : x(std::move(xs)), y(std::move(ys)) {
    const std::size_t n = x.size();
    m.assign(n, 0.0);
    if (n < 4) throw std::invalid_argument("CubicSpline: need at least 4 nodes");
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      if (!(h[i] > 0.0))
        throw std::invalid_argument("CubicSpline: nodes must be strictly increasing");
    }
    // Tridiagonal system for m[1..n-2]; not-a-knot ends folded into the
    // first and last interior rows.
    const std::size_t k = n - 2;
    std::vector<double> a(k, 0.0), b(k, 0.0), c(k, 0.0), r(k, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      a[i - 1] = h[i - 1];
      b[i - 1] = 2.0 * (h[i - 1] + h[i]);
      c[i - 1] = h[i];
      r[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
    }
    // m0 = ((h0+h1) m1 - h0 m2) / h1
    b[0] += h[0] * (h[0] + h[1]) / h[1];
    c[0] -= h[0] * h[0] / h[1];
    a[0] = 0.0;
    // m_{n-1} = ((h_{n-2}+h_{n-3}) m_{n-2} - h_{n-2} m_{n-3}) / h_{n-3}
    const std::size_t e = n - 2;
    b[k - 1] += h[e] * (h[e] + h[e - 1]) / h[e - 1];
    a[k - 1] -= h[e] * h[e] / h[e - 1];
    c[k - 1] = 0.0;
    // Thomas
    for (std::size_t i = 1; i < k; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      r[i] -= w * r[i - 1];
    }
    m[n - 2] = r[k - 1] / b[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = (r[i] - c[i] * m[i + 2]) / b[i];
    m[0] = ((h[0] + h[1]) * m[1] - h[0] * m[2]) / h[1];
    m[n - 1] = ((h[e] + h[e - 1]) * m[n - 2] - h[e] * m[n - 3]) / h[e - 1];
  }

  std::size_t interval(double t) const {
    const auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = (it == x.begin()) ? 1 : static_cast<std::size_t>(it - x.begin());
    i = std::min(i, x.size() - 1);
    return i - 1;
  }

  double value(double t) const {
    const std::size_t i = interval(t);
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - t) / h, B = 1.0 - A;
    return A * y[i] + B * y[i + 1] +
           ((A * A * A - A) * m[i] + (B * B * B - B) * m[i + 1]) * h * h / 6.0;
  }

  double derivative(double t) const {
    const std::size_t i = interval(t);
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - t) / h, B = 1.0 - A;
    return (y[i + 1] - y[i]) / h -
           (3.0 * A * A - 1.0) * h * m[i] / 6.0 + (3.0 * B * B - 1.0) * h * m[i + 1] / 6.0;
  }
};

}  // namespace detail

/// Background shear velocity U(x3) on [-d, 0]. Polynomial representation
/// gives exact derivatives; sampled data falls back to a not-a-knot cubic
/// spline (C^2 by construction).
class ShearProfile {
 public:
  static ShearProfile polynomial(std::vector<double> coeffs, double depth) {
    if (!(depth > 0.0)) throw std::invalid_argument("ShearProfile: depth must be > 0");
    if (coeffs.empty()) throw std::invalid_argument("ShearProfile: empty coefficients");
    ShearProfile p;
    p.depth_ = depth;
    p.coeffs_ = std::move(coeffs);
    return p;
  }

  /// Nodes must ascend from -d to 0; at least 4 of them.
  static ShearProfile sampled(std::vector<double> x3, std::vector<double> values) {
    if (x3.size() != values.size())
      throw std::invalid_argument("ShearProfile: x3/U size mismatch");
    if (x3.size() < 4)
      throw std::invalid_argument("ShearProfile: sampled profile needs at least 4 nodes");
    if (std::abs(x3.back()) > 1e-12 * std::max(1.0, -x3.front()))
      throw std::invalid_argument("ShearProfile: last node must be x3 = 0");
    const double depth = -x3.front();
    if (!(depth > 0.0)) throw std::invalid_argument("ShearProfile: depth must be > 0");
    ShearProfile p;
    p.depth_ = depth;
    p.spline_ = detail::CubicSpline(std::move(x3), std::move(values));
    return p;
  }

  double depth() const { return depth_; }
  bool is_polynomial() const { return !coeffs_.empty(); }

  double value(double x3) const {
    if (is_polynomial()) {
      double v = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 0;) v = v * x3 + coeffs_[i];
      return v;
    }
    return spline_.value(x3);
  }

  double derivative(double x3) const {
    if (is_polynomial()) {
      double v = 0.0;
      for (std::size_t i = coeffs_.size(); i-- > 1;)
        v = v * x3 + coeffs_[i] * static_cast<double>(i);
      return v;
    }
    return spline_.derivative(x3);
  }

  /// U'/U; callers must have validated the profile zero-free.
  double log_derivative(double x3) const { return derivative(x3) / value(x3); }

  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<double>& sample_nodes() const { return spline_.x; }
  const std::vector<double>& sample_values() const { return spline_.y; }

  std::uint64_t content_hash() const {
    std::uint64_t h = fnv1a("U", 1);
    h = hash_double(depth_, h);
    h = fnv1a(is_polynomial() ? "p" : "s", 1, h);
    h = hash_doubles(coeffs_, h);
    h = hash_doubles(spline_.x, h);
    h = hash_doubles(spline_.y, h);
    return h;
  }

 private:
  ShearProfile() = default;
  double depth_ = 1.0;
  std::vector<double> coeffs_;        // ascending powers of x3; empty if sampled
  detail::CubicSpline spline_;
};

/// Dynamic boundary condition D(|k|^2) entering the dispersion relation.
/// Empty polynomial means the default capillary-gravity g + sigma |k|^2;
/// otherwise D is the stored polynomial in |k|^2 (generalized
/// conditions, e.g. hydroelastic).
struct DynamicCondition {
  std::vector<double> poly;
  bool is_default() const { return poly.empty(); }
};

struct WaveParams {
  double g = 9.81;
  double sigma = 0.074;
  DynamicCondition condition;

  WaveParams() = default;
  WaveParams(double g_, double sigma_, DynamicCondition cond = {})
      : g(g_), sigma(sigma_), condition(std::move(cond)) {
    if (!(g > 0.0)) throw std::invalid_argument("WaveParams: g must be > 0");
    if (condition.is_default() && !(sigma > 0.0))
      throw std::invalid_argument("WaveParams: sigma must be > 0");
  }

  double D(double k_squared) const {
    if (condition.is_default()) return g + sigma * k_squared;
    double v = 0.0;
    for (std::size_t i = condition.poly.size(); i-- > 0;)
      v = v * k_squared + condition.poly[i];
    if (!(v > 0.0))
      throw std::domain_error("WaveParams: dynamic condition D(|k|^2) must be positive");
    return v;
  }
};

struct ValidationReport {
  bool zero_free = false;
  bool constant = false;
  double min_abs_value = 0.0;
  double max_abs_value = 0.0;
  double max_abs_derivative = 0.0;
  std::size_t resolution = 0;
};

/// Sign-constancy scan at `resolution` nodes plus interval refinement near
/// the minimum of |U|. Not a symbolic root count.
inline ValidationReport validate_profile(const ShearProfile& profile,
                                         std::size_t resolution = 1024) {
  if (resolution < 16) throw std::invalid_argument("validate_profile: resolution >= 16");
  const double d = profile.depth();
  ValidationReport rep;
  rep.resolution = resolution;

  const auto xs = linspace(-d, 0.0, resolution + 1);
  bool sign_constant = true;
  const double s0 = profile.value(xs[0]) >= 0.0 ? 1.0 : -1.0;
  double min_abs = std::abs(profile.value(xs[0]));
  double max_abs = min_abs;
  double max_du = std::abs(profile.derivative(xs[0]));
  std::size_t arg_min = 0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double u = profile.value(xs[i]);
    if (u * s0 <= 0.0) sign_constant = false;
    const double au = std::abs(u);
    if (au < min_abs) {
      min_abs = au;
      arg_min = i;
    }
    max_abs = std::max(max_abs, au);
    max_du = std::max(max_du, std::abs(profile.derivative(xs[i])));
  }
  // Refine |U| near the scanned minimum.
  const double lo = xs[arg_min == 0 ? 0 : arg_min - 1];
  const double hi = xs[std::min(arg_min + 1, xs.size() - 1)];
  if (hi > lo) {
    const double xr =
        golden_section_min([&](double t) { return std::abs(profile.value(t)); }, lo, hi,
                           1e-13 * d);
    min_abs = std::min(min_abs, std::abs(profile.value(xr)));
  }

  rep.min_abs_value = min_abs;
  rep.max_abs_value = max_abs;
  rep.max_abs_derivative = max_du;
  rep.zero_free = sign_constant && min_abs > 1e-14 * std::max(1.0, max_abs);
  rep.constant = max_du * d <= 1e-10 * std::max(1.0, max_abs);
  return rep;
}

/// (inf, sup) of U'/U over [-d, 0]: dense scan + golden-section refinement.
inline std::pair<double, double> logderiv_extrema(const ShearProfile& profile,
                                                  std::size_t resolution = 1024) {
  const double d = profile.depth();
  const auto xs = linspace(-d, 0.0, resolution + 1);
  auto ratio = [&](double t) { return profile.log_derivative(t); };
  std::size_t arg_lo = 0, arg_hi = 0;
  double lo = ratio(xs[0]), hi = lo;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double r = ratio(xs[i]);
    if (r < lo) {
      lo = r;
      arg_lo = i;
    }
    if (r > hi) {
      hi = r;
      arg_hi = i;
    }
  }
  auto refine = [&](std::size_t idx, double sign) {
    const double a = xs[idx == 0 ? 0 : idx - 1];
    const double b = xs[std::min(idx + 1, xs.size() - 1)];
    if (b <= a) return sign * ratio(xs[idx]);
    const double xr =
        golden_section_min([&](double t) { return sign * ratio(t); }, a, b, 1e-13 * d);
    return std::min(sign * ratio(xr), sign * ratio(xs[idx]));
  };
  lo = refine(arg_lo, 1.0);
  hi = -refine(arg_hi, -1.0);
  return {lo, hi};
}

}  // namespace shearwave
