#pragma once

// Fourier toolkit on the horizontal torus [0,2pi)^2.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "elastoslab/errors.hpp"

namespace elastoslab {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Real-to-half-complex transform of an n1 x n2 periodic grid.
///
/// Values are stored row-major with x1 as the slow index. Coefficients use the
/// FFTW r2c layout n1 x (n2/2+1) and are normalized so that
/// value(x) = sum_k coeff(k) exp(i k.x).
class PlaneTransform {
 public:
  PlaneTransform(int n1, int n2) : n1_(n1), n2_(n2), nh_(n2 / 2 + 1) {
    std::vector<double> r(size());
    std::vector<cplx> c(spectral_size());
    auto* rp = r.data();
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_r2c_2d(n1, n2, rp, cp, flags);
    inv_ = fftw_plan_dft_c2r_2d(n1, n2, cp, rp, flags);
  }
  PlaneTransform(const PlaneTransform&) = delete;
  PlaneTransform& operator=(const PlaneTransform&) = delete;
  ~PlaneTransform() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  /// Shared instance per grid size. Plan creation is serialized; execution is reentrant.
  static const PlaneTransform& get(int n1, int n2) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<PlaneTransform>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{n1, n2}];
    if (!slot) slot = std::make_unique<PlaneTransform>(n1, n2);
    return *slot;
  }

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int nh() const { return nh_; }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * n2_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n1_) * nh_; }

  void forward(const double* in, cplx* out) const {
    // r2c does not modify its input with FFTW_ESTIMATE, but the API is non-const.
    fftw_execute_dft_r2c(fwd_, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(size());
    for (std::size_t j = 0; j < spectral_size(); ++j) out[j] *= scale;
  }

  void inverse(const cplx* in, double* out) const {
    thread_local std::vector<cplx> scratch;
    scratch.assign(in, in + spectral_size());
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(scratch.data()), out);
  }

  /// Signed wave number along x1 for row index i1.
  int wave1(int i1) const { return i1 <= n1_ / 2 ? i1 : i1 - n1_; }
  int wave2(int i2) const { return i2; }
  bool nyquist1(int i1) const { return n1_ % 2 == 0 && i1 == n1_ / 2; }
  bool nyquist2(int i2) const { return n2_ % 2 == 0 && i2 == n2_ / 2; }

  /// Symbol of d/dx_axis; the Nyquist mode is dropped so the operator stays real and skew.
  double derivative_symbol(int axis, int i1, int i2) const {
    if (axis == 1) return nyquist1(i1) ? 0.0 : static_cast<double>(wave1(i1));
    return nyquist2(i2) ? 0.0 : static_cast<double>(wave2(i2));
  }

  double k_squared(int i1, int i2) const {
    const double a = wave1(i1), b = wave2(i2);
    return a * a + b * b;
  }

 private:
  int n1_, n2_, nh_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
};

/// Scalar field on the torus held both as grid values and Fourier coefficients.
class InterfaceField {
 public:
  InterfaceField() = default;
  InterfaceField(int n1, int n2)
      : n1_(n1), n2_(n2),
        values_(static_cast<std::size_t>(n1) * n2, 0.0),
        coeffs_(static_cast<std::size_t>(n1) * (n2 / 2 + 1), cplx{}) {}

  static InterfaceField from_values(int n1, int n2, std::vector<double> values) {
    InterfaceField g;
    g.n1_ = n1;
    g.n2_ = n2;
    g.values_ = std::move(values);
    g.coeffs_.resize(static_cast<std::size_t>(n1) * (n2 / 2 + 1));
    PlaneTransform::get(n1, n2).forward(g.values_.data(), g.coeffs_.data());
    return g;
  }

  static InterfaceField from_coeffs(int n1, int n2, std::vector<cplx> coeffs) {
    InterfaceField g;
    g.n1_ = n1;
    g.n2_ = n2;
    g.coeffs_ = std::move(coeffs);
    g.values_.resize(static_cast<std::size_t>(n1) * n2);
    PlaneTransform::get(n1, n2).inverse(g.coeffs_.data(), g.values_.data());
    return g;
  }

  template <class Fn>
  static InterfaceField sample(int n1, int n2, Fn&& fn) {
    std::vector<double> v(static_cast<std::size_t>(n1) * n2);
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n2; ++i2)
        v[static_cast<std::size_t>(i1) * n2 + i2] = fn(grid_x(i1, n1), grid_x(i2, n2));
    return from_values(n1, n2, std::move(v));
  }

  static InterfaceField constant(int n1, int n2, double c) {
    return from_values(n1, n2, std::vector<double>(static_cast<std::size_t>(n1) * n2, c));
  }

  static double grid_x(int i, int n) { return kTwoPi * i / n; }

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  double value(int i1, int i2) const { return values_[static_cast<std::size_t>(i1) * n2_ + i2]; }
  double operator[](std::size_t j) const { return values_[j]; }
  bool same_grid(const InterfaceField& o) const { return n1_ == o.n1_ && n2_ == o.n2_; }

  /// Coefficient of exp(i(k1 x1 + k2 x2)) for any integer pair in range.
  cplx coeff(int k1, int k2) const {
    const int nh = n2_ / 2 + 1;
    auto wrap = [](int k, int n) { return ((k % n) + n) % n; };
    if (k2 >= 0 && k2 < nh) return coeffs_[static_cast<std::size_t>(wrap(k1, n1_)) * nh + k2];
    const int m2 = wrap(-k2, n2_);
    if (m2 < nh) return std::conj(coeffs_[static_cast<std::size_t>(wrap(-k1, n1_)) * nh + m2]);
    return {};
  }

  double mean() const { return coeffs_.empty() ? 0.0 : coeffs_[0].real(); }
  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }

  /// Area element of one grid cell.
  double cell_area() const { return (kTwoPi / n1_) * (kTwoPi / n2_); }

  InterfaceField& operator+=(const InterfaceField& o) { return combine(o, 1.0); }
  InterfaceField& operator-=(const InterfaceField& o) { return combine(o, -1.0); }
  InterfaceField& operator*=(double a) {
    for (auto& v : values_) v *= a;
    for (auto& c : coeffs_) c *= a;
    return *this;
  }

  /// Pointwise (collocation) product; aliasing is not removed.
  friend InterfaceField operator*(const InterfaceField& a, const InterfaceField& b) {
    require_same(a, b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = a.values_[j] * b.values_[j];
    return from_values(a.n1_, a.n2_, std::move(v));
  }
  friend InterfaceField operator+(InterfaceField a, const InterfaceField& b) { return a += b; }
  friend InterfaceField operator-(InterfaceField a, const InterfaceField& b) { return a -= b; }
  friend InterfaceField operator*(double s, InterfaceField a) { return a *= s; }
  friend InterfaceField operator*(InterfaceField a, double s) { return a *= s; }
  friend InterfaceField operator-(InterfaceField a) { return a *= -1.0; }

  InterfaceField operator+(double c) const {
    std::vector<double> v(values_);
    for (auto& x : v) x += c;
    return from_values(n1_, n2_, std::move(v));
  }

  /// Pointwise map of grid values.
  template <class Fn>
  InterfaceField map(Fn&& fn) const {
    std::vector<double> v(values_);
    for (auto& x : v) x = fn(x);
    return from_values(n1_, n2_, std::move(v));
  }

  static void require_same(const InterfaceField& a, const InterfaceField& b) {
    if (!a.same_grid(b)) throw Error(ErrorKind::GridMismatch, "interface fields on different grids");
  }

 private:
  InterfaceField& combine(const InterfaceField& o, double s) {
    require_same(*this, o);
    for (std::size_t j = 0; j < values_.size(); ++j) values_[j] += s * o.values_[j];
    for (std::size_t j = 0; j < coeffs_.size(); ++j) coeffs_[j] += s * o.coeffs_[j];
    return *this;
  }

  int n1_ = 0, n2_ = 0;
  std::vector<double> values_;
  std::vector<cplx> coeffs_;
};

/// Applies a diagonal Fourier multiplier symbol(i1, i2) given in r2c index space.
template <class Symbol>
InterfaceField apply_symbol(const InterfaceField& g, Symbol&& symbol) {
  const auto& tr = PlaneTransform::get(g.n1(), g.n2());
  std::vector<cplx> c(g.coeffs());
  for (int i1 = 0; i1 < tr.n1(); ++i1)
    for (int i2 = 0; i2 < tr.nh(); ++i2) c[static_cast<std::size_t>(i1) * tr.nh() + i2] *= symbol(i1, i2);
  return InterfaceField::from_coeffs(g.n1(), g.n2(), std::move(c));
}

/// Trigonometric interpolation onto an m1 x m2 grid. Modes beyond either grid's Nyquist
/// row are dropped.
inline InterfaceField resample(const InterfaceField& g, int m1, int m2) {
  const auto& src = PlaneTransform::get(g.n1(), g.n2());
  const auto& dst = PlaneTransform::get(m1, m2);
  std::vector<cplx> c(dst.spectral_size(), cplx{});
  const int k1max = std::min(g.n1(), m1) / 2, k2max = std::min(g.n2(), m2) / 2;
  for (int i1 = 0; i1 < g.n1(); ++i1)
    for (int i2 = 0; i2 < src.nh(); ++i2) {
      const int k1 = src.wave1(i1), k2 = src.wave2(i2);
      if (std::abs(k1) >= k1max || k2 >= k2max) continue;
      const int j1 = k1 >= 0 ? k1 : k1 + m1;
      c[static_cast<std::size_t>(j1) * dst.nh() + k2] = g.coeffs()[static_cast<std::size_t>(i1) * src.nh() + i2];
    }
  return InterfaceField::from_coeffs(m1, m2, std::move(c));
}

/// Exact spectral derivative along axis 1 or 2.
inline InterfaceField horizontal_derivative(const InterfaceField& g, int axis) {
  const auto& tr = PlaneTransform::get(g.n1(), g.n2());
  return apply_symbol(g, [&](int i1, int i2) { return cplx(0.0, tr.derivative_symbol(axis, i1, i2)); });
}

/// Horizontal Laplacian, symbol -|k|^2.
inline InterfaceField horizontal_laplacian(const InterfaceField& g) {
  const auto& tr = PlaneTransform::get(g.n1(), g.n2());
  return apply_symbol(g, [&](int i1, int i2) { return cplx(-tr.k_squared(i1, i2), 0.0); });
}

/// Bessel potential <grad'>^s, symbol (1+|k|^2)^{s/2}.
inline InterfaceField bessel_multiplier(const InterfaceField& g, double s) {
  const auto& tr = PlaneTransform::get(g.n1(), g.n2());
  return apply_symbol(g, [&](int i1, int i2) { return cplx(std::pow(1.0 + tr.k_squared(i1, i2), 0.5 * s), 0.0); });
}

/// Gaussian mollifier with symbol exp(-eps |k|^2 / 4).
inline InterfaceField mollify(const InterfaceField& g, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::PreconditionViolated, "mollify requires eps > 0");
  const auto& tr = PlaneTransform::get(g.n1(), g.n2());
  return apply_symbol(g, [&](int i1, int i2) { return cplx(std::exp(-0.25 * eps * tr.k_squared(i1, i2)), 0.0); });
}

/// H^s norm on the torus: (2pi)^2 sum_k (1+|k|^2)^s |g_k|^2, square-rooted.
inline double sobolev_norm(const InterfaceField& g, double s) {
  const auto& tr = PlaneTransform::get(g.n1(), g.n2());
  double sum = 0.0;
  for (int i1 = 0; i1 < tr.n1(); ++i1) {
    for (int i2 = 0; i2 < tr.nh(); ++i2) {
      // Interior r2c columns stand for a conjugate pair.
      const bool paired = i2 != 0 && !(tr.n2() % 2 == 0 && i2 == tr.n2() / 2);
      const double w = (paired ? 2.0 : 1.0) * std::pow(1.0 + tr.k_squared(i1, i2), s);
      sum += w * std::norm(g.coeffs()[static_cast<std::size_t>(i1) * tr.nh() + i2]);
    }
  }
  return kTwoPi * std::sqrt(sum);
}

/// L^2 inner product over the torus (trapezoid rule, exact for band-limited data).
inline double inner(const InterfaceField& a, const InterfaceField& b) {
  InterfaceField::require_same(a, b);
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s * a.cell_area();
}

inline double l2_norm(const InterfaceField& g) { return std::sqrt(inner(g, g)); }

/// Removes the mean (the (0,0) coefficient).
inline InterfaceField remove_mean(const InterfaceField& g) { return g + (-g.mean()); }

/// Quadratic product with 3/2 zero padding; the result is exact on the retained band.
inline InterfaceField dealiased_product(const InterfaceField& a, const InterfaceField& b) {
  InterfaceField::require_same(a, b);
  const int n1 = a.n1(), n2 = a.n2();
  const int m1 = 3 * n1 / 2 + (3 * n1) % 2, m2 = 3 * n2 / 2 + (3 * n2) % 2;
  const auto& small = PlaneTransform::get(n1, n2);
  const auto& big = PlaneTransform::get(m1, m2);
  auto pad = [&](const InterfaceField& g) {
    std::vector<cplx> c(big.spectral_size(), cplx{});
    for (int i1 = 0; i1 < n1; ++i1) {
      if (small.nyquist1(i1)) continue;
      const int k1 = small.wave1(i1);
      const int j1 = k1 >= 0 ? k1 : k1 + m1;
      for (int i2 = 0; i2 < small.nh(); ++i2) {
        if (small.nyquist2(i2)) continue;
        c[static_cast<std::size_t>(j1) * big.nh() + i2] = g.coeffs()[static_cast<std::size_t>(i1) * small.nh() + i2];
      }
    }
    return InterfaceField::from_coeffs(m1, m2, std::move(c));
  };
  const InterfaceField pa = pad(a), pb = pad(b);
  std::vector<double> prod(pa.size());
  for (std::size_t j = 0; j < prod.size(); ++j) prod[j] = pa[j] * pb[j];
  const auto wide = InterfaceField::from_values(m1, m2, std::move(prod));
  std::vector<cplx> c(small.spectral_size(), cplx{});
  for (int i1 = 0; i1 < n1; ++i1) {
    if (small.nyquist1(i1)) continue;
    const int k1 = small.wave1(i1);
    const int j1 = k1 >= 0 ? k1 : k1 + m1;
    for (int i2 = 0; i2 < small.nh(); ++i2) {
      if (small.nyquist2(i2)) continue;
      c[static_cast<std::size_t>(i1) * small.nh() + i2] = wide.coeffs()[static_cast<std::size_t>(j1) * big.nh() + i2];
    }
  }
  return InterfaceField::from_coeffs(n1, n2, std::move(c));
}

}  // namespace elastoslab
