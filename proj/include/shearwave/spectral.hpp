#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "shearwave/errors.hpp"
#include "shearwave/profile.hpp"
#include "shearwave/util.hpp"

namespace shearwave {

/// Vertical sampling of profiles on [-d, 0]. Chebyshev(-Gauss-Lobatto)
/// nodes get a spectral differentiation matrix; uniform nodes fall back to
/// a not-a-knot spline derivative. Endpoints are always included.
struct VerticalGrid {
  enum class Kind { chebyshev, uniform };

  Kind kind = Kind::chebyshev;
  double depth = 1.0;
  std::vector<double> nodes;      // ascending from -d to 0
  std::vector<double> diff;       // n x n spline derivative matrix, uniform only
  std::vector<double> cos_table;  // cos(k j pi / N), chebyshev only

  static VerticalGrid chebyshev(std::size_t n, double d) {
    if (n < 3) throw std::invalid_argument("VerticalGrid: need at least 3 nodes");
    VerticalGrid g;
    g.kind = Kind::chebyshev;
    g.depth = d;
    g.nodes.resize(n);
    const auto N = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      g.nodes[i] = -0.5 * d * (1.0 + std::cos(static_cast<double>(i) * M_PI / N));
    g.nodes.front() = -d;
    g.nodes.back() = 0.0;
    const std::size_t last = n - 1;
    g.cos_table.resize(n * n);
    for (std::size_t k = 0; k <= last; ++k)
      for (std::size_t j = 0; j <= last; ++j)
        g.cos_table[k * n + j] = std::cos(static_cast<double>(k) * static_cast<double>(j) *
                                          M_PI / static_cast<double>(last));
    return g;
  }

  static VerticalGrid uniform(std::size_t n, double d) {
    if (n < 4) throw std::invalid_argument("VerticalGrid: need at least 4 nodes");
    VerticalGrid g;
    g.kind = Kind::uniform;
    g.depth = d;
    g.nodes = linspace(-d, 0.0, n);
    g.diff.assign(n * n, 0.0);
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      e[j] = 1.0;
      detail::CubicSpline s(g.nodes, e);
      for (std::size_t i = 0; i < n; ++i) g.diff[i * n + j] = s.derivative(g.nodes[i]);
      e[j] = 0.0;
    }
    return g;
  }

  std::size_t size() const { return nodes.size(); }

  /// Chebyshev grids differentiate in coefficient space (cosine transform
  /// plus the T_k' recurrence), which keeps roundoff near n^2 eps instead
  /// of the matrix route's n^4 eps. Uniform grids use the spline matrix.
  std::vector<double> derivative(std::span<const double> f) const {
    const std::size_t n = size();
    if (f.size() != n) throw ShapeMismatch("VerticalGrid::derivative: profile size mismatch");
    if (kind == Kind::chebyshev) return chebyshev_derivative(f);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += diff[i * n + j] * f[j];
      out[i] = acc;
    }
    return out;
  }

  std::vector<double> chebyshev_derivative(std::span<const double> f) const {
    const std::size_t n = size();
    const std::size_t N = n - 1;
    // Ascending node i corresponds to the standard CGL index N - i.
    auto cfac = [&](std::size_t k) { return (k == 0 || k == N) ? 2.0 : 1.0; };
    std::vector<double> a(n, 0.0);
    for (std::size_t k = 0; k <= N; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j <= N; ++j) acc += f[N - j] * cos_table[k * n + j] / cfac(j);
      a[k] = 2.0 * acc / (static_cast<double>(N) * cfac(k));
    }
    std::vector<double> b(n + 1, 0.0);
    b[N] = 0.0;
    if (N >= 1) b[N - 1] = 2.0 * static_cast<double>(N) * a[N];
    for (std::size_t k = N - 1; k >= 1; --k) {
      b[k - 1] = b[k + 1] + 2.0 * static_cast<double>(k) * a[k];
      if (k == 1) break;
    }
    b[0] *= 0.5;
    std::vector<double> out(n, 0.0);
    const double scale = 2.0 / depth;  // y in [-1, 1] onto x in [-d, 0]
    for (std::size_t j = 0; j <= N; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k <= N; ++k) acc += b[k] * cos_table[k * n + j];
      out[N - j] = acc * scale;
    }
    return out;
  }

  bool operator==(const VerticalGrid& o) const {
    return kind == o.kind && depth == o.depth && nodes == o.nodes;
  }
};

/// Per-axis parity of a scalar spectral component: even picks cos(k x),
/// odd picks sin(k x) along that axis.
struct Parity {
  bool odd1 = false;
  bool odd2 = false;
  bool operator==(const Parity&) const = default;
};

struct ModeKey {
  int i = 0;
  int j = 0;
  auto operator<=>(const ModeKey&) const = default;
};

/// Lambda-periodic scalar field in collapsed real trigonometric form:
///   f(x) = sum over (i >= 0, j >= 0) of amp_{ij}(x3) * b1(i kappa1 x1) * b2(j kappa2 x2),
/// with b = cos on even axes and sin on odd axes. (+)-symmetric scalars are
/// the parity-(even, even) case. Amplitudes are stored single-counted: they
/// already include the 4/2/1 weight relative to the complex-exponential
/// coefficients. Odd axes carry no index-0 modes.
class SpectralField {
 public:
  LatticeSpec lattice;
  VerticalGrid vgrid;
  Parity parity;
  std::map<ModeKey, std::vector<double>> modes;

  SpectralField() = default;
  SpectralField(LatticeSpec lat, VerticalGrid vg, Parity p = {})
      : lattice(lat), vgrid(std::move(vg)), parity(p) {}

  static SpectralField zero(const LatticeSpec& lat, const VerticalGrid& vg, Parity p = {}) {
    return SpectralField(lat, vg, p);
  }

  bool empty() const { return modes.empty(); }

  void set_mode(int i, int j, std::vector<double> profile) {
    check_key(i, j);
    if (profile.size() != vgrid.size())
      throw ShapeMismatch("SpectralField::set_mode: profile size mismatch");
    modes[{i, j}] = std::move(profile);
  }

  void set_mode_constant(int i, int j, double value) {
    set_mode(i, j, std::vector<double>(vgrid.size(), value));
  }

  void add_mode(int i, int j, const std::vector<double>& profile, double scale = 1.0) {
    check_key(i, j);
    if (profile.size() != vgrid.size())
      throw ShapeMismatch("SpectralField::add_mode: profile size mismatch");
    auto& dst = modes[{i, j}];
    if (dst.empty()) dst.assign(vgrid.size(), 0.0);
    for (std::size_t l = 0; l < dst.size(); ++l) dst[l] += scale * profile[l];
  }

  /// Exact partial-sum evaluation; x3 must be one of the grid nodes.
  double eval(double x1, double x2, std::size_t node) const {
    double acc = 0.0;
    for (const auto& [key, prof] : modes) {
      const double p1 = key.i * lattice.kappa1() * x1;
      const double p2 = key.j * lattice.kappa2() * x2;
      acc += prof[node] * (parity.odd1 ? std::sin(p1) : std::cos(p1)) *
             (parity.odd2 ? std::sin(p2) : std::cos(p2));
    }
    return acc;
  }

  int max_index1() const {
    int m = 0;
    for (const auto& [key, _] : modes) m = std::max(m, key.i);
    return m;
  }
  int max_index2() const {
    int m = 0;
    for (const auto& [key, _] : modes) m = std::max(m, key.j);
    return m;
  }

  /// d/dx along a horizontal axis flips the parity there and scales by the
  /// wavenumber: (cos)' = -k sin, (sin)' = k cos. Axis 3 differentiates the
  /// vertical profiles.
  SpectralField differentiated(int axis) const {
    if (axis == 3) {
      SpectralField out(lattice, vgrid, parity);
      for (const auto& [key, prof] : modes) out.modes[key] = vgrid.derivative(prof);
      return out;
    }
    if (axis != 1 && axis != 2) throw std::invalid_argument("differentiated: axis in {1,2,3}");
    Parity p = parity;
    const bool was_odd = (axis == 1) ? parity.odd1 : parity.odd2;
    if (axis == 1)
      p.odd1 = !p.odd1;
    else
      p.odd2 = !p.odd2;
    SpectralField out(lattice, vgrid, p);
    const double kappa = (axis == 1) ? lattice.kappa1() : lattice.kappa2();
    for (const auto& [key, prof] : modes) {
      const int idx = (axis == 1) ? key.i : key.j;
      if (idx == 0) continue;  // derivative of the constant direction vanishes
      const double factor = (was_odd ? 1.0 : -1.0) * kappa * static_cast<double>(idx);
      auto scaled = prof;
      for (auto& v : scaled) v *= factor;
      out.modes[key] = std::move(scaled);
    }
    return out;
  }

  SpectralField scaled(double c) const {
    SpectralField out(lattice, vgrid, parity);
    for (const auto& [key, prof] : modes) {
      auto p = prof;
      for (auto& v : p) v *= c;
      out.modes[key] = std::move(p);
    }
    return out;
  }

  void axpy(double alpha, const SpectralField& other) {
    if (!(parity == other.parity)) throw ShapeMismatch("SpectralField::axpy: parity mismatch");
    for (const auto& [key, prof] : other.modes) add_mode(key.i, key.j, prof, alpha);
  }

 private:
  void check_key(int i, int j) const {
    if (i < 0 || j < 0) throw std::invalid_argument("SpectralField: mode indices must be >= 0");
    if ((parity.odd1 && i == 0) || (parity.odd2 && j == 0))
      throw std::invalid_argument("SpectralField: sin basis carries no index-0 mode");
  }
};

/// (+)-symmetric vector field: v(R_j x) = (-1)^j R_j v(x). Component bases
/// are cos*cos, sin*sin and sin*cos; all stored profiles are real, with the
/// complex-series factors absorbed at this type boundary.
struct SymmetricVectorField {
  SpectralField c1, c2, c3;

  SymmetricVectorField() = default;
  SymmetricVectorField(const LatticeSpec& lat, const VerticalGrid& vg)
      : c1(lat, vg, Parity{false, false}),
        c2(lat, vg, Parity{true, true}),
        c3(lat, vg, Parity{true, false}) {}

  static SymmetricVectorField zero(const LatticeSpec& lat, const VerticalGrid& vg) {
    return SymmetricVectorField(lat, vg);
  }

  std::array<double, 3> eval(double x1, double x2, std::size_t node) const {
    return {c1.eval(x1, x2, node), c2.eval(x1, x2, node), c3.eval(x1, x2, node)};
  }

  SpectralField divergence() const {
    SpectralField div = c1.differentiated(1);
    div.axpy(1.0, c2.differentiated(2));
    div.axpy(1.0, c3.differentiated(3));
    return div;
  }

  void axpy(double alpha, const SymmetricVectorField& o) {
    c1.axpy(alpha, o.c1);
    c2.axpy(alpha, o.c2);
    c3.axpy(alpha, o.c3);
  }

  SymmetricVectorField scaled(double a) const {
    SymmetricVectorField out;
    out.c1 = c1.scaled(a);
    out.c2 = c2.scaled(a);
    out.c3 = c3.scaled(a);
    return out;
  }
};

/// Collocation values on [0,lambda1) x [0,lambda2) x [-d,0]; uniform
/// horizontal nodes, vertical nodes from the attached VerticalGrid.
struct Grid3D {
  LatticeSpec lattice;
  VerticalGrid vgrid;
  std::size_t n1 = 0, n2 = 0;
  std::vector<double> v;

  Grid3D() = default;
  Grid3D(const LatticeSpec& lat, const VerticalGrid& vg, std::size_t n1_, std::size_t n2_)
      : lattice(lat), vgrid(vg), n1(n1_), n2(n2_), v(n1_ * n2_ * vg.size(), 0.0) {
    if (n1 % 2 != 0 || n2 % 2 != 0)
      throw std::invalid_argument("Grid3D: horizontal sizes must be even");
  }

  std::size_t n3() const { return vgrid.size(); }
  double& at(std::size_t i1, std::size_t i2, std::size_t i3) {
    return v[(i1 * n2 + i2) * n3() + i3];
  }
  double at(std::size_t i1, std::size_t i2, std::size_t i3) const {
    return v[(i1 * n2 + i2) * n3() + i3];
  }
  double x1(std::size_t i1) const {
    return lattice.lambda1 * static_cast<double>(i1) / static_cast<double>(n1);
  }
  double x2(std::size_t i2) const {
    return lattice.lambda2 * static_cast<double>(i2) / static_cast<double>(n2);
  }
  double x3(std::size_t i3) const { return vgrid.nodes[i3]; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double rms() const {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
  }

  bool compatible(const Grid3D& o) const {
    return lattice == o.lattice && vgrid == o.vgrid && n1 == o.n1 && n2 == o.n2;
  }
};

/// Rows x cols values; used for x1-averaged (x2, x3) data and for surface
/// (x1, x2) slices.
struct Grid2D {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Grid2D() = default;
  Grid2D(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  double max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double rms() const {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
  }
};

namespace detail {

inline std::vector<double> basis_table(bool odd, int index, double kappa, double length,
                                       std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t p = 0; p < n; ++p) {
    const double x = length * static_cast<double>(p) / static_cast<double>(n);
    const double arg = static_cast<double>(index) * kappa * x;
    t[p] = odd ? std::sin(arg) : std::cos(arg);
  }
  return t;
}

}  // namespace detail

/// Exact evaluation of the partial trigonometric sum on the grid.
inline Grid3D synthesize(const SpectralField& field, std::size_t n1, std::size_t n2) {
  if (field.max_index1() >= static_cast<int>(n1 / 2) ||
      field.max_index2() >= static_cast<int>(n2 / 2))
    throw AliasError("synthesize: field modes violate the Nyquist bound of the grid");
  Grid3D grid(field.lattice, field.vgrid, n1, n2);
  const std::size_t n3 = grid.n3();
  for (const auto& [key, prof] : field.modes) {
    const auto t1 = detail::basis_table(field.parity.odd1, key.i, field.lattice.kappa1(),
                                        field.lattice.lambda1, n1);
    const auto t2 = detail::basis_table(field.parity.odd2, key.j, field.lattice.kappa2(),
                                        field.lattice.lambda2, n2);
    for (std::size_t p = 0; p < n1; ++p) {
      if (t1[p] == 0.0) continue;
      for (std::size_t q = 0; q < n2; ++q) {
        const double hpq = t1[p] * t2[q];
        if (hpq == 0.0) continue;
        double* dst = &grid.v[(p * n2 + q) * n3];
        for (std::size_t l = 0; l < n3; ++l) dst[l] += hpq * prof[l];
      }
    }
  }
  return grid;
}

/// Left inverse of synthesize on band-limited data: projects the grid onto
/// modes up to (max_i, max_j). Throws AliasError past the Nyquist bound.
inline SpectralField analyze(const Grid3D& grid, int max_i, int max_j, Parity parity = {}) {
  if (max_i >= static_cast<int>(grid.n1 / 2) || max_j >= static_cast<int>(grid.n2 / 2))
    throw AliasError("analyze: requested modes violate the Nyquist bound");
  SpectralField field(grid.lattice, grid.vgrid, parity);
  const std::size_t n3 = grid.n3();
  for (int i = parity.odd1 ? 1 : 0; i <= max_i; ++i) {
    const auto t1 = detail::basis_table(parity.odd1, i, grid.lattice.kappa1(),
                                        grid.lattice.lambda1, grid.n1);
    const double c1 = (i == 0 ? 1.0 : 2.0) / static_cast<double>(grid.n1);
    for (int j = parity.odd2 ? 1 : 0; j <= max_j; ++j) {
      const auto t2 = detail::basis_table(parity.odd2, j, grid.lattice.kappa2(),
                                          grid.lattice.lambda2, grid.n2);
      const double c2 = (j == 0 ? 1.0 : 2.0) / static_cast<double>(grid.n2);
      std::vector<double> prof(n3, 0.0);
      for (std::size_t p = 0; p < grid.n1; ++p) {
        if (t1[p] == 0.0) continue;
        for (std::size_t q = 0; q < grid.n2; ++q) {
          const double hpq = t1[p] * t2[q];
          if (hpq == 0.0) continue;
          const double* src = &grid.v[(p * grid.n2 + q) * n3];
          for (std::size_t l = 0; l < n3; ++l) prof[l] += hpq * src[l];
        }
      }
      for (auto& x : prof) x *= c1 * c2;
      field.modes[{i, j}] = std::move(prof);
    }
  }
  return field;
}

inline Grid3D pointwise_product(const Grid3D& a, const Grid3D& b) {
  if (!a.compatible(b)) throw ShapeMismatch("pointwise_product: incompatible grids");
  Grid3D out = a;
  for (std::size_t n = 0; n < out.v.size(); ++n) out.v[n] *= b.v[n];
  return out;
}

/// Average over the periodic x1 direction (exact trapezoid for band-limited
/// data). Returns (x2, x3) values: rows = n2, cols = n3.
inline Grid2D x1_average(const Grid3D& grid) {
  Grid2D out(grid.n2, grid.n3());
  for (std::size_t q = 0; q < grid.n2; ++q)
    for (std::size_t l = 0; l < grid.n3(); ++l) {
      double acc = 0.0;
      for (std::size_t p = 0; p < grid.n1; ++p) acc += grid.at(p, q, l);
      out.at(q, l) = acc / static_cast<double>(grid.n1);
    }
  return out;
}

/// Spectral x1-average: keeps exactly the k1 = 0 modes. Fields odd in x1
/// average to zero identically.
inline SpectralField x1_average(const SpectralField& field) {
  SpectralField out(field.lattice, field.vgrid, field.parity);
  if (field.parity.odd1) return out;
  for (const auto& [key, prof] : field.modes)
    if (key.i == 0) out.modes[key] = prof;
  return out;
}

/// Uniform periodic (Fourier) differentiation matrix: exact for modes below
/// Nyquist. n must be even.
inline std::vector<double> fourier_diff_matrix(std::size_t n, double length) {
  std::vector<double> D(n * n, 0.0);
  const double scale = two_pi / length;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto diff = static_cast<long>(i) - static_cast<long>(j);
      const double sgn = (diff % 2 == 0) ? 1.0 : -1.0;
      D[i * n + j] =
          scale * 0.5 * sgn / std::tan(M_PI * static_cast<double>(diff) / static_cast<double>(n));
    }
  return D;
}

/// Grid derivative along axis 1 or 2 (Fourier matrix) or 3 (vertical grid).
inline Grid3D grid_derivative(const Grid3D& g, int axis) {
  Grid3D out(g.lattice, g.vgrid, g.n1, g.n2);
  const std::size_t n3 = g.n3();
  if (axis == 1) {
    const auto D = fourier_diff_matrix(g.n1, g.lattice.lambda1);
    for (std::size_t i = 0; i < g.n1; ++i)
      for (std::size_t p = 0; p < g.n1; ++p) {
        const double dip = D[i * g.n1 + p];
        if (dip == 0.0) continue;
        for (std::size_t q = 0; q < g.n2; ++q) {
          const double* src = &g.v[(p * g.n2 + q) * n3];
          double* dst = &out.v[(i * g.n2 + q) * n3];
          for (std::size_t l = 0; l < n3; ++l) dst[l] += dip * src[l];
        }
      }
  } else if (axis == 2) {
    const auto D = fourier_diff_matrix(g.n2, g.lattice.lambda2);
    for (std::size_t i1 = 0; i1 < g.n1; ++i1)
      for (std::size_t q = 0; q < g.n2; ++q)
        for (std::size_t p = 0; p < g.n2; ++p) {
          const double dqp = D[q * g.n2 + p];
          if (dqp == 0.0) continue;
          const double* src = &g.v[(i1 * g.n2 + p) * n3];
          double* dst = &out.v[(i1 * g.n2 + q) * n3];
          for (std::size_t l = 0; l < n3; ++l) dst[l] += dqp * src[l];
        }
  } else if (axis == 3) {
    for (std::size_t i1 = 0; i1 < g.n1; ++i1)
      for (std::size_t q = 0; q < g.n2; ++q) {
        const double* src = &g.v[(i1 * g.n2 + q) * n3];
        const auto col = g.vgrid.derivative(std::span<const double>(src, n3));
        double* dst = &out.v[(i1 * g.n2 + q) * n3];
        for (std::size_t l = 0; l < n3; ++l) dst[l] = col[l];
      }
  } else {
    throw std::invalid_argument("grid_derivative: axis in {1,2,3}");
  }
  return out;
}

/// Derivative of x1-averaged (x2, x3) data: axis 2 is Fourier along the
/// rows, axis 3 applies the vertical matrix along the columns.
inline Grid2D averaged_derivative(const Grid2D& g, int axis, const LatticeSpec& lattice,
                                  const VerticalGrid& vgrid) {
  if (g.cols != vgrid.size()) throw ShapeMismatch("averaged_derivative: vertical size mismatch");
  Grid2D out(g.rows, g.cols);
  if (axis == 2) {
    const auto D = fourier_diff_matrix(g.rows, lattice.lambda2);
    for (std::size_t q = 0; q < g.rows; ++q)
      for (std::size_t p = 0; p < g.rows; ++p) {
        const double dqp = D[q * g.rows + p];
        if (dqp == 0.0) continue;
        for (std::size_t l = 0; l < g.cols; ++l) out.at(q, l) += dqp * g.at(p, l);
      }
  } else if (axis == 3) {
    for (std::size_t q = 0; q < g.rows; ++q) {
      const auto row = vgrid.derivative(std::span<const double>(&g.v[q * g.cols], g.cols));
      for (std::size_t l = 0; l < g.cols; ++l) out.at(q, l) = row[l];
    }
  } else {
    throw std::invalid_argument("averaged_derivative: axis in {2,3}");
  }
  return out;
}

}  // namespace shearwave
