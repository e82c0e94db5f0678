#pragma once

// Reference slab T^2 x [-1, 0], its vertical discretization, and bulk fields.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "elastoslab/errors.hpp"
#include "elastoslab/spectral.hpp"

namespace elastoslab {

/// Grid of the reference slab: n1 x n2 horizontal points, nz+1 uniform levels on [-1, 0].
///
/// `degree` is the polynomial degree of the vertical Lagrange elements; it must divide nz.
struct SlabGrid {
  int n1 = 32;
  int n2 = 32;
  int nz = 32;
  int degree = 8;

  /// Grid with the highest element degree in {8, 4, 2, 1} that divides nz.
  static SlabGrid make(int n1, int n2, int nz) {
    int p = 8;
    while (p > 1 && nz % p != 0) p /= 2;
    return {n1, n2, nz, p};
  }

  int levels() const { return nz + 1; }
  std::size_t plane() const { return static_cast<std::size_t>(n1) * n2; }
  std::size_t points() const { return plane() * levels(); }
  double dz() const { return 1.0 / nz; }
  double y3(int m) const { return m == nz ? 0.0 : -1.0 + static_cast<double>(m) / nz; }
  double cell_area() const { return (kTwoPi / n1) * (kTwoPi / n2); }

  void validate() const {
    if (n1 < 4 || n2 < 4 || nz < 2)
      throw Error(ErrorKind::ConfigInvalid, "grid too small (need n1,n2 >= 4 and nz >= 2)");
    if (degree < 1 || nz % degree != 0)
      throw Error(ErrorKind::ConfigInvalid, "vertical degree must divide nz");
  }

  friend bool operator==(const SlabGrid&, const SlabGrid&) = default;
};

namespace detail {

inline std::vector<double> equispaced(int p) {
  std::vector<double> xi(p + 1);
  for (int j = 0; j <= p; ++j) xi[j] = static_cast<double>(j) / p;
  return xi;
}

inline double lagrange(const std::vector<double>& xi, int j, double t) {
  double v = 1.0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    if (static_cast<int>(i) != j) v *= (t - xi[i]) / (xi[j] - xi[i]);
  return v;
}

inline double lagrange_derivative(const std::vector<double>& xi, int j, double t) {
  double sum = 0.0;
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (static_cast<int>(k) == j) continue;
    double term = 1.0 / (xi[j] - xi[k]);
    for (std::size_t i = 0; i < xi.size(); ++i)
      if (static_cast<int>(i) != j && i != k) term *= (t - xi[i]) / (xi[j] - xi[i]);
    sum += term;
  }
  return sum;
}

/// Gauss-Legendre rule on [0, 1].
inline void gauss_legendre(int n, std::vector<double>& t, std::vector<double>& w) {
  t.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    t[i] = 0.5 * (1.0 - x);
    w[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace detail

/// Vertical operators shared by every field on a grid: element quadrature, 1D Galerkin
/// matrices, and the windowed finite-difference derivative on the uniform nodes.
class VerticalScheme {
 public:
  VerticalScheme(int nz, int p) : nz_(nz), p_(p), elements_(nz / p), h_elem_(static_cast<double>(p) / nz) {
    const auto xi = detail::equispaced(p);
    nq_ = p + 2;
    std::vector<double> t, w;
    detail::gauss_legendre(nq_, t, w);
    basis_.assign(static_cast<std::size_t>(nq_) * (p + 1), 0.0);
    dbasis_.assign(basis_.size(), 0.0);
    for (int q = 0; q < nq_; ++q)
      for (int j = 0; j <= p; ++j) {
        basis_[q * (p + 1) + j] = detail::lagrange(xi, j, t[q]);
        dbasis_[q * (p + 1) + j] = detail::lagrange_derivative(xi, j, t[q]) / h_elem_;
      }
    const int n = nz + 1;
    quad_y_.resize(static_cast<std::size_t>(elements_) * nq_);
    quad_w_.resize(quad_y_.size());
    for (int e = 0; e < elements_; ++e)
      for (int q = 0; q < nq_; ++q) {
        quad_y_[e * nq_ + q] = -1.0 + (e + t[q]) * h_elem_;
        quad_w_[e * nq_ + q] = w[q] * h_elem_;
      }
    stiffness_.assign(static_cast<std::size_t>(n) * n, 0.0);
    mass_.assign(stiffness_.size(), 0.0);
    for (int e = 0; e < elements_; ++e)
      for (int q = 0; q < nq_; ++q) {
        const double wq = quad_w_[e * nq_ + q];
        for (int a = 0; a <= p; ++a)
          for (int b = 0; b <= p; ++b) {
            const std::size_t idx = static_cast<std::size_t>(e * p + a) * n + (e * p + b);
            stiffness_[idx] += wq * dbasis(q, a) * dbasis(q, b);
            mass_[idx] += wq * basis(q, a) * basis(q, b);
          }
      }
    nodal_w_.assign(n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) nodal_w_[a] += mass_[static_cast<std::size_t>(a) * n + b];

    // Windowed Lagrange derivative of order p on the uniform nodes.
    const int width = std::max(p, 2);
    diff_.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> local(width + 1);
    for (int j = 0; j <= width; ++j) local[j] = j;
    for (int m = 0; m < n; ++m) {
      const int start = std::clamp(m - width / 2, 0, nz - width);
      for (int j = 0; j <= width; ++j)
        diff_[static_cast<std::size_t>(m) * n + start + j] =
            detail::lagrange_derivative(local, j, m - start) * nz;
    }
  }

  static const VerticalScheme& get(int nz, int p) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<VerticalScheme>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{nz, p}];
    if (!slot) slot = std::make_unique<VerticalScheme>(nz, p);
    return *slot;
  }
  static const VerticalScheme& get(const SlabGrid& g) { return get(g.nz, g.degree); }

  int nz() const { return nz_; }
  int degree() const { return p_; }
  int elements() const { return elements_; }
  int quad_per_element() const { return nq_; }
  int quad_levels() const { return elements_ * nq_; }
  double element_height() const { return h_elem_; }
  /// Local basis value / y-derivative at quadrature point q of an element.
  double basis(int q, int a) const { return basis_[q * (p_ + 1) + a]; }
  double dbasis(int q, int a) const { return dbasis_[q * (p_ + 1) + a]; }
  double quad_y(int l) const { return quad_y_[l]; }
  double quad_weight(int l) const { return quad_w_[l]; }
  /// First node of the element that owns quadrature level l.
  int element_first_node(int l) const { return (l / nq_) * p_; }
  int local_quad(int l) const { return l % nq_; }

  double stiffness(int a, int b) const { return stiffness_[static_cast<std::size_t>(a) * (nz_ + 1) + b]; }
  double mass(int a, int b) const { return mass_[static_cast<std::size_t>(a) * (nz_ + 1) + b]; }
  double nodal_weight(int m) const { return nodal_w_[m]; }
  double diff(int m, int n) const { return diff_[static_cast<std::size_t>(m) * (nz_ + 1) + n]; }
  /// Column range of the nonzero derivative stencil of row m.
  std::pair<int, int> diff_window(int m) const {
    const int width = std::max(p_, 2);
    const int start = std::clamp(m - width / 2, 0, nz_ - width);
    return {start, start + width};
  }

 private:
  int nz_, p_, elements_, nq_ = 0;
  double h_elem_;
  std::vector<double> basis_, dbasis_, quad_y_, quad_w_;
  std::vector<double> stiffness_, mass_, nodal_w_, diff_;
};

/// Scalar field sampled on the reference slab nodes, level-major (level 0 is y3 = -1).
class BulkField {
 public:
  BulkField() = default;
  explicit BulkField(const SlabGrid& grid, double fill = 0.0) : grid_(grid), data_(grid.points(), fill) {}

  template <class Fn>
  static BulkField sample(const SlabGrid& grid, Fn&& fn) {
    BulkField v(grid);
    for (int m = 0; m < grid.levels(); ++m)
      for (int i1 = 0; i1 < grid.n1; ++i1)
        for (int i2 = 0; i2 < grid.n2; ++i2)
          v.at(m, i1, i2) = fn(InterfaceField::grid_x(i1, grid.n1), InterfaceField::grid_x(i2, grid.n2), grid.y3(m));
    return v;
  }

  const SlabGrid& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  double& operator[](std::size_t j) { return data_[j]; }
  double operator[](std::size_t j) const { return data_[j]; }
  double& at(int m, int i1, int i2) { return data_[index(m, i1, i2)]; }
  double at(int m, int i1, int i2) const { return data_[index(m, i1, i2)]; }
  std::size_t index(int m, int i1, int i2) const {
    return static_cast<std::size_t>(m) * grid_.plane() + static_cast<std::size_t>(i1) * grid_.n2 + i2;
  }
  std::span<double> level(int m) { return {data_.data() + m * grid_.plane(), grid_.plane()}; }
  std::span<const double> level(int m) const { return {data_.data() + m * grid_.plane(), grid_.plane()}; }

  InterfaceField level_field(int m) const {
    auto l = level(m);
    return InterfaceField::from_values(grid_.n1, grid_.n2, std::vector<double>(l.begin(), l.end()));
  }
  void set_level(int m, const InterfaceField& g) {
    auto l = level(m);
    std::copy(g.values().begin(), g.values().end(), l.begin());
  }

  /// Hash of the interface that defined the coordinate map this field was produced under (0: none).
  std::uint64_t map_hash = 0;

  BulkField& operator+=(const BulkField& o) { return axpy(1.0, o); }
  BulkField& operator-=(const BulkField& o) { return axpy(-1.0, o); }
  BulkField& operator*=(double a) {
    for (auto& v : data_) v *= a;
    return *this;
  }
  BulkField& axpy(double a, const BulkField& o) {
    require_same(*this, o);
    for (std::size_t j = 0; j < data_.size(); ++j) data_[j] += a * o.data_[j];
    return *this;
  }
  friend BulkField operator+(BulkField a, const BulkField& b) { return a += b; }
  friend BulkField operator-(BulkField a, const BulkField& b) { return a -= b; }
  friend BulkField operator*(double s, BulkField a) { return a *= s; }
  friend BulkField operator*(const BulkField& a, const BulkField& b) {
    require_same(a, b);
    BulkField r(a.grid_);
    for (std::size_t j = 0; j < r.data_.size(); ++j) r.data_[j] = a.data_[j] * b.data_[j];
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  static void require_same(const BulkField& a, const BulkField& b) {
    if (!(a.grid_ == b.grid_)) throw Error(ErrorKind::GridMismatch, "bulk fields on different grids");
  }

 private:
  SlabGrid grid_;
  std::vector<double> data_;
};

using VectorField = std::array<BulkField, 3>;

inline VectorField zero_vector(const SlabGrid& g) { return {BulkField(g), BulkField(g), BulkField(g)}; }

/// Restriction to the top level y3 = 0 (the free surface).
inline InterfaceField trace(const BulkField& v) { return v.level_field(v.grid().nz); }
/// Restriction to the bottom level y3 = -1.
inline InterfaceField bottom_trace(const BulkField& v) { return v.level_field(0); }

/// Spectral derivative of every level along axis 1 or 2 (reference coordinates).
inline BulkField horizontal_derivative(const BulkField& v, int axis) {
  const auto& g = v.grid();
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  BulkField out(g);
  std::vector<cplx> c(tr.spectral_size());
  for (int m = 0; m < g.levels(); ++m) {
    tr.forward(v.level(m).data(), c.data());
    for (int i1 = 0; i1 < tr.n1(); ++i1)
      for (int i2 = 0; i2 < tr.nh(); ++i2) c[static_cast<std::size_t>(i1) * tr.nh() + i2] *= cplx(0.0, tr.derivative_symbol(axis, i1, i2));
    tr.inverse(c.data(), out.level(m).data());
  }
  return out;
}

/// Windowed finite-difference derivative along y3 (reference coordinates).
inline BulkField vertical_derivative(const BulkField& v) {
  const auto& g = v.grid();
  const auto& vs = VerticalScheme::get(g);
  BulkField out(g);
  const std::size_t np = g.plane();
  for (int m = 0; m < g.levels(); ++m) {
    auto [lo, hi] = vs.diff_window(m);
    auto dst = out.level(m);
    for (int n = lo; n <= hi; ++n) {
      const double c = vs.diff(m, n);
      auto src = v.level(n);
      for (std::size_t j = 0; j < np; ++j) dst[j] += c * src[j];
    }
  }
  return out;
}

}  // namespace elastoslab
