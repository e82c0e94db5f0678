#pragma once

// Dirichlet-Neumann operators of the interface and their exact commutator representations.

#include "elastoslab/elliptic.hpp"

namespace elastoslab {

/// N_f g = N . grad(H_f g) on the interface (Dirichlet bottom).
inline InterfaceField apply_dn(const InterfaceField& g, const CoordinateMap& map) {
  return top_flux(harmonic_ext_dirichlet(g, map), nullptr, map);
}

/// N-bar_f g = N . grad(H-bar_f g) on the interface (Neumann bottom).
inline InterfaceField apply_dn_neumann(const InterfaceField& g, const CoordinateMap& map) {
  return top_flux(harmonic_ext_neumann(g, map), nullptr, map);
}

inline void require_mean_zero(const InterfaceField& h, double tol = 1e-8) {
  if (std::abs(h.mean()) > tol * std::max(1.0, h.max_abs()))
    throw Error(ErrorKind::NotMeanZero, "mean " + std::to_string(h.mean()) + " outside the range of N-bar");
}

/// H-bar_f (N-bar_f^{-1} h): harmonic, N . grad w = h on top, d3 w = 0 at the bottom.
/// The free constants (and grid checkerboards on even grids) are fixed by a trace with no such component.
inline BulkField invert_dn_neumann_bulk(const InterfaceField& h, const CoordinateMap& map) {
  require_mean_zero(h);
  BulkField w = solve_bvp(map, nullptr, {Boundary::Neumann, remove_mean(h)}, {Boundary::Neumann, std::nullopt});
  const int nz = map.grid().nz;
  for (const auto& z : detail::neumann_kernel(map.grid())) {
    double num = 0.0, den = 0.0;
    auto wt = w.level(nz);
    auto zt = z.level(nz);
    for (std::size_t j = 0; j < wt.size(); ++j) {
      num += wt[j] * zt[j];
      den += zt[j] * zt[j];
    }
    w.axpy(-num / den, z);
  }
  return w;
}

/// N-bar_f^{-1} h for mean-zero h; the result is mean-zero.
inline InterfaceField invert_dn_neumann(const InterfaceField& h, const CoordinateMap& map) {
  return trace(invert_dn_neumann_bulk(h, map));
}

/// Material derivative of the normal split as A tau1 + B tau2 + C N.
struct DtNormal {
  InterfaceField a, b, c;
  std::array<InterfaceField, 3> vec;
};

/// D_t N_f from the interface and the velocity trace (kinematic condition assumed).
inline DtNormal dt_normal(const InterfaceField& f, const std::array<InterfaceField, 3>& u_trace) {
  const auto fr = normal_vector(f);
  const auto f1 = horizontal_derivative(f, 1), f2 = horizontal_derivative(f, 2);
  auto dot_n = [&](int axis) {
    InterfaceField s(f.n1(), f.n2());
    for (int j = 0; j < 3; ++j) s += horizontal_derivative(u_trace[j], axis) * fr.normal[j];
    return s;
  };
  const auto d1 = dot_n(1), d2 = dot_n(2);
  const auto inv = fr.normal_sq.map([](double x) { return 1.0 / x; });
  DtNormal out;
  out.a = (-1.0 * d1 - f2 * f2 * d1 + f1 * f2 * d2) * inv;
  out.b = (-1.0 * d2 - f1 * f1 * d2 + f1 * f2 * d1) * inv;
  out.c = (f1 * d1 + f2 * d2) * inv;
  for (int j = 0; j < 3; ++j) out.vec[j] = out.a * fr.tau1[j] + out.b * fr.tau2[j] + out.c * fr.normal[j];
  return out;
}

/// Physical Hessian of a scalar, [i][j] = d_i d_j v.
inline std::array<VectorField, 3> mapped_hessian(const BulkField& v, const CoordinateMap& map) {
  const auto gv = mapped_gradient(v, map);
  return {mapped_gradient(gv[0], map), mapped_gradient(gv[1], map), mapped_gradient(gv[2], map)};
}

/// Physical Laplacian of each component of a vector field.
inline VectorField mapped_vector_laplacian(const VectorField& u, const CoordinateMap& map) {
  VectorField out = zero_vector(map.grid());
  for (int i = 0; i < 3; ++i) {
    const auto h = mapped_hessian(u[i], map);
    for (int k = 0; k < 3; ++k) out[i] += h[k][k];
  }
  return out;
}

inline std::array<InterfaceField, 3> vector_trace(const VectorField& v) { return {trace(v[0]), trace(v[1]), trace(v[2])}; }

/// [D_t, N-bar_f] g through the exact representation
///   N . grad Dbar^{-1}(2 grad u : grad^2 Hbar g + Lap u . grad Hbar g) + N . grad Hbarbar g
///   - grad Hbar g . (N . grad u) + A d1 g + B d2 g + C N-bar g,
/// where Hbarbar g is harmonic, zero on top, with d3 = d3 u1 d1 Hbar g + d3 u2 d2 Hbar g at the bottom.
inline InterfaceField material_dn_commutator(const InterfaceField& g, const VectorField& u, const CoordinateMap& map) {
  const auto& grid = map.grid();
  const BulkField w = harmonic_ext_neumann(g, map);
  const auto gw = mapped_gradient(w, map);
  const auto hw = mapped_hessian(w, map);
  const auto ju = mapped_jacobian(u, map);
  const auto lu = mapped_vector_laplacian(u, map);
  BulkField src(grid);
  for (int i = 0; i < 3; ++i) {
    src += lu[i] * gw[i];
    for (int k = 0; k < 3; ++k) src += 2.0 * (ju[i][k] * hw[k][i]);
  }
  const BulkField dbar = poisson_dirichlet(src, map);
  auto term = top_flux(dbar, &src, map);
  const auto bot = bottom_trace(ju[0][2] * gw[0] + ju[1][2] * gw[1]);
  const BulkField hh = solve_bvp(map, nullptr, {Boundary::Dirichlet, std::nullopt}, {Boundary::Neumann, bot});
  term += top_flux(hh, nullptr, map);
  const auto fr = normal_vector(map.interface());
  for (int j = 0; j < 3; ++j) {
    InterfaceField n_grad_uj(grid.n1, grid.n2);
    for (int i = 0; i < 3; ++i) n_grad_uj += fr.normal[i] * trace(ju[j][i]);
    term -= trace(gw[j]) * n_grad_uj;
  }
  const auto dn = dt_normal(map.interface(), vector_trace(u));
  term += dn.a * horizontal_derivative(g, 1) + dn.b * horizontal_derivative(g, 2) + dn.c * top_flux(w, nullptr, map);
  return term;
}

/// [N_f, a] g = g N_f a - 2 N . grad Delta^{-1}(grad H_f a . grad H_f g), Delta^{-1} Dirichlet on both faces.
inline InterfaceField multiplier_dn_commutator(const InterfaceField& a, const InterfaceField& g, const CoordinateMap& map) {
  const BulkField ha = harmonic_ext_dirichlet(a, map);
  const BulkField hg = harmonic_ext_dirichlet(g, map);
  const auto ga = mapped_gradient(ha, map), gg = mapped_gradient(hg, map);
  BulkField src = ga[0] * gg[0] + ga[1] * gg[1] + ga[2] * gg[2];
  const BulkField w = poisson_dirichlet_both(src, map);
  return g * top_flux(ha, nullptr, map) - 2.0 * top_flux(w, &src, map);
}

}  // namespace elastoslab
