#pragma once

// Constant-coefficient (flat slab) elliptic solves, diagonal in horizontal frequency.

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "elastoslab/slab_grid.hpp"

namespace elastoslab {

enum class Boundary { Dirichlet, Neumann };

/// Boundary condition type on the top (y3 = 0) and bottom (y3 = -1) levels.
struct BoundaryPair {
  Boundary top = Boundary::Dirichlet;
  Boundary bottom = Boundary::Dirichlet;
  bool pure_neumann() const { return top == Boundary::Neumann && bottom == Boundary::Neumann; }
  bool is_dirichlet(int m, int nz) const {
    return (m == nz && top == Boundary::Dirichlet) || (m == 0 && bottom == Boundary::Dirichlet);
  }
  friend auto operator<=>(const BoundaryPair&, const BoundaryPair&) = default;
};

/// Per-mode inverse of the 1D Galerkin operator K + kappa M restricted to the free levels.
///
/// Built once from the generalized eigenproblem K V = M V diag(lambda), so every mode
/// costs two dense mat-vecs. For the pure Neumann pair the kappa = 0 kernel is dropped.
class FlatModeSolver {
 public:
  FlatModeSolver(int nz, int p, BoundaryPair bc) : nz_(nz), bc_(bc) {
    const auto& vs = VerticalScheme::get(nz, p);
    for (int m = 0; m <= nz; ++m)
      if (!bc.is_dirichlet(m, nz)) free_.push_back(m);
    const int n = static_cast<int>(free_.size());
    Eigen::MatrixXd k(n, n), mm(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        k(a, b) = vs.stiffness(free_[a], free_[b]);
        mm(a, b) = vs.mass(free_[a], free_[b]);
      }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, mm);
    vecs_ = es.eigenvectors();
    vals_ = es.eigenvalues();
  }

  static const FlatModeSolver& get(int nz, int p, BoundaryPair bc) {
    static std::mutex mutex;
    static std::map<std::tuple<int, int, BoundaryPair>, std::unique_ptr<FlatModeSolver>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{nz, p, bc}];
    if (!slot) slot = std::make_unique<FlatModeSolver>(nz, p, bc);
    return *slot;
  }
  static const FlatModeSolver& get(const SlabGrid& g, BoundaryPair bc) { return get(g.nz, g.degree, bc); }

  const std::vector<int>& free_levels() const { return free_; }
  const Eigen::VectorXd& eigenvalues() const { return vals_; }

  /// x = (K + kappa M)^{-1} b on the free levels, in place. Near-null components are discarded.
  void solve(double kappa, Eigen::VectorXcd& b) const {
    Eigen::VectorXcd c = vecs_.transpose() * b;
    for (int j = 0; j < c.size(); ++j) {
      const double d = vals_[j] + kappa;
      c[j] = std::abs(d) < 1e-11 ? cplx{} : c[j] / d;
    }
    b = vecs_ * c;
  }

 private:
  int nz_;
  BoundaryPair bc_;
  std::vector<int> free_;
  Eigen::MatrixXd vecs_;
  Eigen::VectorXd vals_;
};

namespace detail {

/// Spectral coefficients of every level: out[m] holds the r2c array of level m.
inline std::vector<std::vector<cplx>> level_spectra(const BulkField& v) {
  const auto& g = v.grid();
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  std::vector<std::vector<cplx>> out(g.levels(), std::vector<cplx>(tr.spectral_size()));
  for (int m = 0; m < g.levels(); ++m) tr.forward(v.level(m).data(), out[m].data());
  return out;
}

inline BulkField from_level_spectra(const SlabGrid& g, const std::vector<std::vector<cplx>>& c) {
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  BulkField out(g);
  for (int m = 0; m < g.levels(); ++m) tr.inverse(c[m].data(), out.level(m).data());
  return out;
}

inline double flat_kappa(const PlaneTransform& tr, int i1, int i2) {
  const double a = tr.derivative_symbol(1, i1, i2), b = tr.derivative_symbol(2, i1, i2);
  return a * a + b * b;
}

}  // namespace detail

/// Applies the inverse of the flat Galerkin operator (cell area included) to a residual.
/// Rows on Dirichlet levels are ignored on input and zero on output.
inline BulkField flat_inverse(const BulkField& r, BoundaryPair bc) {
  const auto& g = r.grid();
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  const auto& solver = FlatModeSolver::get(g, bc);
  const auto& free = solver.free_levels();
  auto spec = detail::level_spectra(r);
  const double inv_area = 1.0 / g.cell_area();
  Eigen::VectorXcd b(free.size());
  std::vector<std::vector<cplx>> out(g.levels(), std::vector<cplx>(tr.spectral_size(), cplx{}));
  for (int i1 = 0; i1 < tr.n1(); ++i1)
    for (int i2 = 0; i2 < tr.nh(); ++i2) {
      const std::size_t j = static_cast<std::size_t>(i1) * tr.nh() + i2;
      for (std::size_t a = 0; a < free.size(); ++a) b[a] = spec[free[a]][j] * inv_area;
      solver.solve(detail::flat_kappa(tr, i1, i2), b);
      for (std::size_t a = 0; a < free.size(); ++a) out[free[a]][j] = b[a];
    }
  return detail::from_level_spectra(g, out);
}

/// Flat discrete harmonic extension of top data g, with zero Dirichlet or Neumann data at the bottom.
inline BulkField extend_flat(const InterfaceField& top, const SlabGrid& g, Boundary bottom = Boundary::Dirichlet) {
  const BoundaryPair bc{Boundary::Dirichlet, bottom};
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  const auto& vs = VerticalScheme::get(g);
  const auto& solver = FlatModeSolver::get(g, bc);
  const auto& free = solver.free_levels();
  std::vector<std::vector<cplx>> out(g.levels(), std::vector<cplx>(tr.spectral_size(), cplx{}));
  Eigen::VectorXcd b(free.size());
  for (int i1 = 0; i1 < tr.n1(); ++i1)
    for (int i2 = 0; i2 < tr.nh(); ++i2) {
      const std::size_t j = static_cast<std::size_t>(i1) * tr.nh() + i2;
      const double kappa = detail::flat_kappa(tr, i1, i2);
      const cplx gt = top.coeffs()[j];
      for (std::size_t a = 0; a < free.size(); ++a)
        b[a] = -(vs.stiffness(free[a], g.nz) + kappa * vs.mass(free[a], g.nz)) * gt;
      solver.solve(kappa, b);
      for (std::size_t a = 0; a < free.size(); ++a) out[free[a]][j] = b[a];
      out[g.nz][j] = gt;
    }
  return detail::from_level_spectra(g, out);
}

}  // namespace elastoslab
