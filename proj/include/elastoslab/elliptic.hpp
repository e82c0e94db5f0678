#pragma once

// Boundary-value problems for the Laplacian on the mapped slab.
//
// Discretization: horizontal Fourier collocation times vertical continuous Lagrange
// elements on the uniform levels. The weak form a(v, w) = int grad v . grad w dx is
// assembled matrix-free and solved with CG preconditioned by the flat (f = 0) operator.
// Neumann data and boundary fluxes are the consistent variational ones, which keeps
// every Dirichlet-Neumann map exactly symmetric in the discrete inner product.

#include <atomic>
#include <cmath>
#include <optional>

#include "elastoslab/coordinate_map.hpp"
#include "elastoslab/flat_modes.hpp"

namespace elastoslab {

/// Iteration controls shared by every solve.
struct SolverSettings {
  double tolerance = 1e-10;
  int max_iterations = 500;
  /// Test hook: stop after this many iterations and return the partial iterate (0 = off).
  int truncate_after = 0;
};

inline SolverSettings& solver_settings() {
  static SolverSettings s;
  return s;
}

/// Restores the solver settings on scope exit.
class ScopedSolverSettings {
 public:
  explicit ScopedSolverSettings(const SolverSettings& s) : saved_(solver_settings()) { solver_settings() = s; }
  ~ScopedSolverSettings() { solver_settings() = saved_; }

 private:
  SolverSettings saved_;
};

namespace detail {

/// d/dy1 and d/dy2 of every level with one forward transform per level.
inline std::pair<BulkField, BulkField> horizontal_gradient(const BulkField& v) {
  const auto& g = v.grid();
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  std::pair<BulkField, BulkField> out{BulkField(g), BulkField(g)};
  std::vector<cplx> c(tr.spectral_size()), d(tr.spectral_size());
  for (int m = 0; m < g.levels(); ++m) {
    tr.forward(v.level(m).data(), c.data());
    for (int axis : {1, 2}) {
      for (int i1 = 0; i1 < tr.n1(); ++i1)
        for (int i2 = 0; i2 < tr.nh(); ++i2) {
          const std::size_t j = static_cast<std::size_t>(i1) * tr.nh() + i2;
          d[j] = c[j] * cplx(0.0, tr.derivative_symbol(axis, i1, i2));
        }
      tr.inverse(d.data(), (axis == 1 ? out.first : out.second).level(m).data());
    }
  }
  return out;
}

/// -(d1 a + d2 b) per level, the discrete adjoint of the horizontal gradient.
inline void add_negative_divergence(const BulkField& a, const BulkField& b, BulkField& out) {
  const auto& g = a.grid();
  const auto& tr = PlaneTransform::get(g.n1, g.n2);
  std::vector<cplx> ca(tr.spectral_size()), cb(tr.spectral_size());
  std::vector<double> r(g.plane());
  for (int m = 0; m < g.levels(); ++m) {
    tr.forward(a.level(m).data(), ca.data());
    tr.forward(b.level(m).data(), cb.data());
    for (int i1 = 0; i1 < tr.n1(); ++i1)
      for (int i2 = 0; i2 < tr.nh(); ++i2) {
        const std::size_t j = static_cast<std::size_t>(i1) * tr.nh() + i2;
        ca[j] = -(ca[j] * cplx(0.0, tr.derivative_symbol(1, i1, i2)) + cb[j] * cplx(0.0, tr.derivative_symbol(2, i1, i2)));
      }
    tr.inverse(ca.data(), r.data());
    auto dst = out.level(m);
    for (std::size_t j = 0; j < r.size(); ++j) dst[j] += r[j];
  }
}

/// Scatters quadrature-level values back to nodes: out_n += sum_l coef(q, n) vals_l.
template <class Coef>
void scatter_from_quadrature(const std::vector<double>& vals, const SlabGrid& g, Coef&& coef, BulkField& out) {
  const auto& vs = VerticalScheme::get(g);
  const std::size_t np = g.plane();
  for (int l = 0; l < vs.quad_levels(); ++l) {
    const int first = vs.element_first_node(l), q = vs.local_quad(l);
    const double* src = vals.data() + l * np;
    for (int a = 0; a <= g.degree; ++a) {
      const double c = coef(q, a);
      auto dst = out.level(first + a);
      for (std::size_t j = 0; j < np; ++j) dst[j] += c * src[j];
    }
  }
}

inline double dot(const BulkField& a, const BulkField& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

inline void zero_dirichlet_rows(BulkField& v, BoundaryPair bc) {
  const int nz = v.grid().nz;
  for (int m : {0, nz})
    if (bc.is_dirichlet(m, nz))
      for (auto& x : v.level(m)) x = 0.0;
}

/// Vertically constant fields in the kernel of the pure Neumann operator.
inline std::vector<BulkField> neumann_kernel(const SlabGrid& g) {
  std::vector<BulkField> out;
  for (int s1 = 0; s1 < 2; ++s1)
    for (int s2 = 0; s2 < 2; ++s2) {
      if ((s1 && g.n1 % 2) || (s2 && g.n2 % 2)) continue;
      out.push_back(BulkField::sample(g, [&](double x1, double x2, double) {
        const int i1 = static_cast<int>(std::lround(x1 * g.n1 / kTwoPi));
        const int i2 = static_cast<int>(std::lround(x2 * g.n2 / kTwoPi));
        return ((s1 ? i1 : 0) + (s2 ? i2 : 0)) % 2 ? -1.0 : 1.0;
      }));
    }
  return out;
}

/// Removes the kernel components; returns the relative size of what was removed.
inline double project_out_kernel(BulkField& v) {
  const double norm = std::sqrt(dot(v, v));
  double removed = 0.0;
  for (const auto& z : neumann_kernel(v.grid())) {
    const double c = dot(v, z) / dot(z, z);
    v.axpy(-c, z);
    removed += c * c * dot(z, z);
  }
  return norm > 0.0 ? std::sqrt(removed) / norm : 0.0;
}

}  // namespace detail

/// Galerkin operator of -Laplacian on the mapped slab: (A v)_n = a(v, basis_n), all rows.
inline BulkField apply_laplacian_form(const BulkField& v, const CoordinateMap& map) {
  require_map(v, map);
  const auto& g = map.grid();
  const auto& vs = VerticalScheme::get(g);
  auto [d1, d2] = detail::horizontal_gradient(v);
  auto q1 = to_quadrature(d1), q2 = to_quadrature(d2), q3 = to_quadrature_dz(v);
  const auto& jac = map.jac_q();
  const auto& g13 = map.g13_q();
  const auto& g23 = map.g23_q();
  const auto& g33 = map.g33_q();
  const std::size_t np = g.plane();
  const double area = g.cell_area();
  for (int l = 0; l < vs.quad_levels(); ++l) {
    const double w = vs.quad_weight(l) * area;
    for (std::size_t j = l * np; j < (l + 1) * np; ++j) {
      const double a1 = q1[j], a2 = q2[j], a3 = q3[j];
      q1[j] = w * (jac[j] * a1 + g13[j] * a3);
      q2[j] = w * (jac[j] * a2 + g23[j] * a3);
      q3[j] = w * (g13[j] * a1 + g23[j] * a2 + g33[j] * a3);
    }
  }
  BulkField s1(g), s2(g), out(g);
  detail::scatter_from_quadrature(q1, g, [&](int q, int a) { return vs.basis(q, a); }, s1);
  detail::scatter_from_quadrature(q2, g, [&](int q, int a) { return vs.basis(q, a); }, s2);
  detail::scatter_from_quadrature(q3, g, [&](int q, int a) { return vs.dbasis(q, a); }, out);
  detail::add_negative_divergence(s1, s2, out);
  return out;
}

/// Mass matrix with the volume element: (M_J r)_n = int r basis_n dx.
inline BulkField apply_mass(const BulkField& r, const CoordinateMap& map) {
  require_map(r, map);
  const auto& g = map.grid();
  const auto& vs = VerticalScheme::get(g);
  auto q = to_quadrature(r);
  const auto& jac = map.jac_q();
  const std::size_t np = g.plane();
  for (int l = 0; l < vs.quad_levels(); ++l) {
    const double w = vs.quad_weight(l) * g.cell_area();
    for (std::size_t j = l * np; j < (l + 1) * np; ++j) q[j] *= w * jac[j];
  }
  BulkField out(g);
  detail::scatter_from_quadrature(q, g, [&](int qq, int a) { return vs.basis(qq, a); }, out);
  return out;
}

/// Boundary data for one face: Dirichlet value, or Neumann flux (N . grad v on top, d3 v at the bottom).
struct FaceData {
  Boundary kind = Boundary::Dirichlet;
  std::optional<InterfaceField> data;  ///< empty means homogeneous
};

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;
  double kernel_defect = 0.0;  ///< pure Neumann only: relative size of the incompatible part
};

/// Solves Laplacian(v) = source with the given face data. For the pure Neumann pair the
/// data is first made compatible (kernel part removed, size reported) and the solution is
/// returned with no kernel component.
inline BulkField solve_bvp(const CoordinateMap& map, const BulkField* source, const FaceData& top,
                           const FaceData& bottom, SolveInfo* info = nullptr) {
  const auto& g = map.grid();
  const BoundaryPair bc{top.kind, bottom.kind};
  const double area = g.cell_area();
  BulkField x(g);
  if (top.kind == Boundary::Dirichlet && top.data) x.set_level(g.nz, *top.data);
  if (bottom.kind == Boundary::Dirichlet && bottom.data) x.set_level(0, *bottom.data);
  BulkField b(g);
  if (source) b.axpy(-1.0, apply_mass(*source, map));
  if (top.kind == Boundary::Neumann && top.data) {
    auto l = b.level(g.nz);
    for (std::size_t j = 0; j < l.size(); ++j) l[j] += area * (*top.data)[j];
  }
  if (bottom.kind == Boundary::Neumann && bottom.data) {
    auto l = b.level(0);
    for (std::size_t j = 0; j < l.size(); ++j) l[j] -= area * (*bottom.data)[j];
  }
  BulkField r = b - apply_laplacian_form(x, map);
  detail::zero_dirichlet_rows(r, bc);
  SolveInfo local;
  if (bc.pure_neumann()) local.kernel_defect = detail::project_out_kernel(r);
  const double rhs_norm = std::sqrt(detail::dot(r, r));
  const auto& st = solver_settings();
  BulkField dx(g);
  if (rhs_norm > 0.0) {
    BulkField z = flat_inverse(r, bc);
    BulkField p = z;
    double rz = detail::dot(r, z);
    double rn = rhs_norm;
    int it = 0;
    while (rn > st.tolerance * rhs_norm) {
      if (st.truncate_after > 0 && it >= st.truncate_after) break;
      if (it >= st.max_iterations)
        throw Error(ErrorKind::SolverDiverged, "PCG stalled at relative residual " + std::to_string(rn / rhs_norm) +
                                                   " after " + std::to_string(it) + " iterations");
      BulkField ap = apply_laplacian_form(p, map);
      detail::zero_dirichlet_rows(ap, bc);
      if (bc.pure_neumann()) detail::project_out_kernel(ap);
      const double alpha = rz / detail::dot(p, ap);
      dx.axpy(alpha, p);
      r.axpy(-alpha, ap);
      rn = std::sqrt(detail::dot(r, r));
      z = flat_inverse(r, bc);
      const double rz_new = detail::dot(r, z);
      p *= rz_new / rz;
      p += z;
      rz = rz_new;
      ++it;
    }
    local.iterations = it;
    local.residual = rn / rhs_norm;
  }
  if (bc.pure_neumann()) detail::project_out_kernel(dx);
  x += dx;
  x.map_hash = map.hash();
  if (info) *info = local;
  return x;
}

/// H_f g: harmonic, trace g, zero at the bottom.
inline BulkField harmonic_ext_dirichlet(const InterfaceField& g, const CoordinateMap& map) {
  return solve_bvp(map, nullptr, {Boundary::Dirichlet, g}, {Boundary::Dirichlet, std::nullopt});
}

/// H-bar_f g: harmonic, trace g, zero normal derivative at the bottom.
inline BulkField harmonic_ext_neumann(const InterfaceField& g, const CoordinateMap& map) {
  return solve_bvp(map, nullptr, {Boundary::Dirichlet, g}, {Boundary::Neumann, std::nullopt});
}

/// Laplacian(w) = rhs, w = 0 on the interface, d3 w = 0 at the bottom.
inline BulkField poisson_dirichlet(const BulkField& rhs, const CoordinateMap& map) {
  return solve_bvp(map, &rhs, {Boundary::Dirichlet, std::nullopt}, {Boundary::Neumann, std::nullopt});
}

/// Laplacian(w) = rhs, w = 0 on both boundaries.
inline BulkField poisson_dirichlet_both(const BulkField& rhs, const CoordinateMap& map) {
  return solve_bvp(map, &rhs, {Boundary::Dirichlet, std::nullopt}, {Boundary::Dirichlet, std::nullopt});
}

/// Consistent flux N . grad v on the interface of a solution of Laplacian(v) = source.
inline InterfaceField top_flux(const BulkField& v, const BulkField* source, const CoordinateMap& map) {
  const auto& g = map.grid();
  BulkField res = apply_laplacian_form(v, map);
  if (source) res += apply_mass(*source, map);
  auto h = res.level_field(g.nz);
  h *= 1.0 / g.cell_area();
  return h;
}

/// Consistent flux d3 v at the bottom of a solution of Laplacian(v) = source.
inline InterfaceField bottom_flux(const BulkField& v, const BulkField* source, const CoordinateMap& map) {
  const auto& g = map.grid();
  BulkField res = apply_laplacian_form(v, map);
  if (source) res += apply_mass(*source, map);
  auto h = res.level_field(0);
  h *= -1.0 / g.cell_area();
  return h;
}

/// tr(grad v grad w) = sum_ij d_j v_i d_i w_j.
inline BulkField gradient_trace_product(const VectorField& v, const VectorField& w, const CoordinateMap& map) {
  const auto jv = mapped_jacobian(v, map);
  const auto jw = mapped_jacobian(w, map);
  BulkField out(map.grid());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out += jv[i][j] * jw[j][i];
  return out;
}

/// p_{v,w}: Laplacian p = -tr(grad v grad w), p = 0 on the interface, d3 p = 0 at the bottom.
inline BulkField pressure_bilinear(const VectorField& v, const VectorField& w, const CoordinateMap& map) {
  return poisson_dirichlet(-1.0 * gradient_trace_product(v, w, map), map);
}

/// Harmonic weight with top data taylor + cutoff * c_tilde and bottom value c0.
inline BulkField weight_field(const InterfaceField& taylor, const InterfaceField& cutoff, double c_tilde, double c0,
                              const CoordinateMap& map, double tol = 1e-8) {
  const auto top = taylor + c_tilde * cutoff;
  if (top.min() < c0 - tol)
    throw Error(ErrorKind::PreconditionViolated, "weight boundary data " + std::to_string(top.min()) + " < c0");
  BulkField w = harmonic_ext_dirichlet(top + (-c0), map);
  for (auto& x : w.data()) x += c0;
  const double hi = std::max(c_tilde + taylor.max(), c0);
  for (double x : w.data())
    if (x < c0 - tol || x > hi + tol)
      throw Error(ErrorKind::PreconditionViolated, "weight violates the maximum principle");
  return w;
}

/// c-tilde = max(0, c0 - min over the regions of the Taylor coefficient) + c0.
inline double weight_constant(const InterfaceField& taylor, const InterfaceField& region_mask, double c0) {
  double lo = 1e300;
  for (std::size_t j = 0; j < taylor.size(); ++j)
    if (region_mask[j] > 0.5) lo = std::min(lo, taylor[j]);
  if (lo == 1e300) lo = taylor.min();
  return std::max(0.0, c0 - lo) + c0;
}

/// int_Omega w * sum_c v_c^2 dx with Gauss quadrature through the map (w omitted: 1).
inline double square_integral(std::initializer_list<const BulkField*> fields, const CoordinateMap& map,
                              const BulkField* weight = nullptr) {
  const auto& g = map.grid();
  const auto& vs = VerticalScheme::get(g);
  const auto& jac = map.jac_q();
  std::vector<double> acc(jac.size(), 0.0);
  for (const auto* f : fields) {
    const auto q = to_quadrature(*f);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += q[j] * q[j];
  }
  std::vector<double> wq;
  if (weight) wq = to_quadrature(*weight);
  const std::size_t np = g.plane();
  double s = 0.0;
  for (int l = 0; l < vs.quad_levels(); ++l) {
    double sl = 0.0;
    for (std::size_t j = l * np; j < (l + 1) * np; ++j) sl += acc[j] * jac[j] * (weight ? wq[j] : 1.0);
    s += sl * vs.quad_weight(l);
  }
  return s * g.cell_area();
}

/// int_Omega a b dx.
inline double volume_inner(const BulkField& a, const BulkField& b, const CoordinateMap& map) {
  const auto& g = map.grid();
  const auto& vs = VerticalScheme::get(g);
  const auto qa = to_quadrature(a), qb = to_quadrature(b);
  const auto& jac = map.jac_q();
  const std::size_t np = g.plane();
  double s = 0.0;
  for (int l = 0; l < vs.quad_levels(); ++l) {
    double sl = 0.0;
    for (std::size_t j = l * np; j < (l + 1) * np; ++j) sl += qa[j] * qb[j] * jac[j];
    s += sl * vs.quad_weight(l);
  }
  return s * g.cell_area();
}

}  // namespace elastoslab
