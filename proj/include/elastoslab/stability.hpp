#pragma once

// Mixed stability condition, energy functionals and the linear dispersion oracle.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "elastoslab/dynamics.hpp"

namespace elastoslab {

/// Smallest eigenvalue of the Gram matrix G_ab = sum_j F_aj F_bj of the horizontal trace rows.
inline InterfaceField lambda_noncollinear(const std::array<std::array<InterfaceField, 3>, 2>& rows) {
  const auto& r0 = rows[0][0];
  std::vector<double> out(r0.size());
  for (std::size_t x = 0; x < out.size(); ++x) {
    double g11 = 0.0, g22 = 0.0, g12 = 0.0;
    for (int j = 0; j < 3; ++j) {
      g11 += rows[0][j][x] * rows[0][j][x];
      g22 += rows[1][j][x] * rows[1][j][x];
      g12 += rows[0][j][x] * rows[1][j][x];
    }
    const double half_tr = 0.5 * (g11 + g22);
    const double rad = std::hypot(0.5 * (g11 - g22), g12);
    // det / larger root is the cancellation-free form of the smaller root.
    const double big = half_tr + rad;
    out[x] = big > 0.0 ? std::max(0.0, (g11 * g22 - g12 * g12) / big) : 0.0;
  }
  return InterfaceField::from_values(r0.n1(), r0.n2(), out);
}

inline InterfaceField lambda_noncollinear(const FlowState& st) { return lambda_noncollinear(deformation_traces(st.F)); }

struct TaylorCoefficient {
  InterfaceField normal_form;  ///< -N . grad p
  InterfaceField d3_form;      ///< -d3 p
  InterfaceField normal_sq;    ///< |N|^2
};

inline TaylorCoefficient taylor_coefficient(const FlowState& st, const Pressure& pr) {
  return {taylor_normal_form(st, pr), -1.0 * trace(mapped_gradient(pr.p, *st.map)[2]), normal_vector(st.f).normal_sq};
}

inline TaylorCoefficient taylor_coefficient(const FlowState& st) { return taylor_coefficient(st, assemble_pressure(st)); }

struct StabilityReport {
  double t = 0.0;
  double taylor_min = std::numeric_limits<double>::infinity();  ///< over Gamma^1, -N . grad p form
  double lambda_min = std::numeric_limits<double>::infinity();  ///< over Gamma^2
  bool taylor_ok = true;
  bool lambda_ok = true;
  bool passes() const { return taylor_ok && lambda_ok; }
};

inline double masked_min(const InterfaceField& v, const InterfaceField& mask) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < v.size(); ++x)
    if (mask[x] > 0.5) m = std::min(m, v[x]);
  return m;
}

inline StabilityReport stability_report(const FlowState& st, const Pressure& pr) {
  const int n1 = st.f.n1(), n2 = st.f.n2();
  StabilityReport r;
  r.t = st.t;
  r.taylor_min = masked_min(taylor_normal_form(st, pr), region_mask(st.params.gamma1, n1, n2));
  r.lambda_min = masked_min(lambda_noncollinear(st), region_mask(st.params.gamma2, n1, n2));
  r.taylor_ok = r.taylor_min >= 0.5 * st.params.c0;
  r.lambda_ok = r.lambda_min >= 0.5 * st.params.c0;
  return r;
}

inline StabilityReport stability_report(const FlowState& st) { return stability_report(st, assemble_pressure(st)); }

/// Monitor mode: raises StabilityLost when either minimum falls below c0 / 2.
inline void require_stable(const StabilityReport& r, double c0) {
  if (!r.passes())
    throw Error(ErrorKind::StabilityLost, "at t = " + std::to_string(r.t) + ": Taylor min " + std::to_string(r.taylor_min) +
                                              ", Lambda min " + std::to_string(r.lambda_min) + ", threshold " +
                                              std::to_string(0.5 * c0));
}

/// sqrt(sum_j (F_j . xi)^2 + eps |xi|^2 + a |xi| coth |xi|).
inline double dispersion_omega(const std::array<std::array<double, 3>, 3>& cols, double a, double eps,
                               std::array<double, 2> xi) {
  const double k = std::hypot(xi[0], xi[1]);
  double w2 = eps * k * k + a * (k > 0.0 ? k / std::tanh(k) : 1.0);
  for (const auto& c : cols) w2 += (c[0] * xi[0] + c[1] * xi[1]) * (c[0] * xi[0] + c[1] * xi[1]);
  return std::sqrt(std::max(0.0, w2));
}

/// Sum over multi-indices |alpha| <= order of ||d^alpha v||^2 with mapped derivatives.
inline double bulk_sobolev_sq(const std::vector<const BulkField*>& fields, const CoordinateMap& map, int order) {
  double total = 0.0;
  for (const auto* f : fields) {
    // Non-decreasing axis sequences enumerate the multi-indices once each.
    std::vector<std::pair<BulkField, int>> layer{{*f, 0}};
    for (int r = 0; r <= order; ++r) {
      std::vector<std::pair<BulkField, int>> next;
      for (auto& [v, last] : layer) {
        total += square_integral({&v}, map);
        if (r == order) continue;
        const auto g = mapped_gradient(v, map);
        for (int a = last; a < 3; ++a) next.emplace_back(g[a], a);
      }
      layer = std::move(next);
    }
  }
  return total;
}

inline double vector_sobolev_sq(const VectorField& v, const CoordinateMap& map, int order) {
  return bulk_sobolev_sq({&v[0], &v[1], &v[2]}, map, order);
}

inline double deformation_sobolev_sq(const Deformation& F, const CoordinateMap& map, int order) {
  double s = 0.0;
  for (const auto& col : F) s += vector_sobolev_sq(col, map, order);
  return s;
}

inline double interface_sq(const InterfaceField& g) { return inner(g, g); }

struct EnergyReport {
  double material = 0.0;  ///< sum_i |D_t <grad'>^{s-3/2} d_i f|^2
  double elastic = 0.0;   ///< sum_i sum_k |D_{F_k} <grad'>^{s-3/2} d_i f|^2
  double capillary = 0.0; ///< eps sum_i |d_i f|^2_{H^{s-1/2}}
  double weighted = 0.0;  ///< sum_i int a~ |grad H_f(<grad'>^{s-3/2} d_i f)|^2
  double f_l2 = 0.0;
  double ft_l2 = 0.0;
  double u_hs = 0.0;
  double F_hs = 0.0;
  double weight_min = 0.0, weight_max = 0.0;
  double total() const { return material + elastic + capillary + weighted + f_l2 + ft_l2 + u_hs + F_hs; }
};

/// Harmonic weight a~: top data max(-d3 p + phi c~, c0) with phi ~ 1 off Gamma^1, bottom c0.
inline BulkField energy_weight(const FlowState& st, const Pressure& pr) {
  const int n1 = st.f.n1(), n2 = st.f.n2();
  const double c0 = st.params.c0;
  const auto taylor = taylor_coefficient(st, pr).d3_form;
  const double ct = weight_constant(taylor, InterfaceField::constant(n1, n2, 1.0), c0);
  const auto top = (taylor + ct * taylor_cutoff(st.params.gamma1, n1, n2)).map([c0](double v) { return std::max(v, c0); });
  return weight_field(top, InterfaceField(n1, n2), 0.0, c0, *st.map, 1e-6);
}

namespace detail {

struct SlopeEnergy {
  double material = 0.0, elastic = 0.0, weighted = 0.0;
};

/// Boundary part of the energy for slopes d_i g lifted by <grad'>^sigma, with D_t, D_F and
/// the weight taken from `st` and the time derivative of g supplied.
inline SlopeEnergy slope_energy(const FlowState& st, const BulkField& weight, const InterfaceField& g,
                                const InterfaceField& gt, double sigma) {
  const auto& map = *st.map;
  const auto ub = vector_trace(st.u);
  const auto ft = deformation_traces(st.F);
  SlopeEnergy e;
  for (int i = 1; i <= 2; ++i) {
    const auto lifted = bessel_multiplier(horizontal_derivative(g, i), sigma);
    auto dt = bessel_multiplier(horizontal_derivative(gt, i), sigma);
    for (int s = 0; s < 2; ++s) dt += ub[s] * horizontal_derivative(lifted, s + 1);
    e.material += interface_sq(dt);
    for (int k = 0; k < 3; ++k)
      e.elastic += interface_sq(ft[0][k] * horizontal_derivative(lifted, 1) + ft[1][k] * horizontal_derivative(lifted, 2));
    const auto grad = mapped_gradient(harmonic_ext_dirichlet(lifted, map), map);
    e.weighted += square_integral({&grad[0], &grad[1], &grad[2]}, map, &weight);
  }
  return e;
}

}  // namespace detail

/// E^s_eps; with eps = 0 this is E^s.
inline EnergyReport energy_es_eps(const FlowState& st, int s, const Pressure& pr) {
  if (s < 4) throw Error(ErrorKind::PreconditionViolated, "energy index s must be >= 4");
  const auto& map = *st.map;
  const auto w = energy_weight(st, pr);
  const auto ft = surface_rate(st);
  const auto b = detail::slope_energy(st, w, st.f, ft, s - 1.5);
  EnergyReport r;
  r.material = b.material;
  r.elastic = b.elastic;
  r.weighted = b.weighted;
  for (int i = 1; i <= 2; ++i) {
    const double n = sobolev_norm(horizontal_derivative(st.f, i), s - 0.5);
    r.capillary += st.eps * n * n;
  }
  r.f_l2 = interface_sq(st.f);
  r.ft_l2 = interface_sq(ft);
  r.u_hs = vector_sobolev_sq(st.u, map, s);
  r.F_hs = deformation_sobolev_sq(st.F, map, s);
  r.weight_min = *std::min_element(w.data().begin(), w.data().end());
  r.weight_max = *std::max_element(w.data().begin(), w.data().end());
  return r;
}

inline EnergyReport energy_es_eps(const FlowState& st, int s) { return energy_es_eps(st, s, assemble_pressure(st)); }

/// M^s_0 = |f|^2_{H^s} + sum_k |D_{F_k} f|^2_{H^{s-1/2}} + ||u||^2_{H^s} + ||F||^2_{H^s}.
inline double initial_energy_m0(const FlowState& st, int s) {
  const auto ft = deformation_traces(st.F);
  double m = std::pow(sobolev_norm(st.f, s), 2);
  for (int k = 0; k < 3; ++k)
    m += std::pow(sobolev_norm(ft[0][k] * horizontal_derivative(st.f, 1) + ft[1][k] * horizontal_derivative(st.f, 2), s - 0.5), 2);
  return m + vector_sobolev_sq(st.u, *st.map, s) + deformation_sobolev_sq(st.F, *st.map, s);
}

/// M^s_eps = eps |f|^2_{H^{s+1/2}} + |f|^2_{H^{s-1/2}} + ||u||^2_{H^s} + ||F||^2_{H^s}.
inline double initial_energy_meps(const FlowState& st, int s) {
  return st.eps * std::pow(sobolev_norm(st.f, s + 0.5), 2) + std::pow(sobolev_norm(st.f, s - 0.5), 2) +
         vector_sobolev_sq(st.u, *st.map, s) + deformation_sobolev_sq(st.F, *st.map, s);
}

/// E^s_D between two states: boundary terms of f^A - f^B at order s - 5/2 with D_t, D_F and the
/// weight of A; bulk differences of the reference-grid fields in H^{s-1} of the flat reference slab.
inline EnergyReport difference_energy(const FlowState& a, const FlowState& b, int s) {
  if (!(a.grid() == b.grid())) throw Error(ErrorKind::GridMismatch, "states live on different grids");
  const auto pa = assemble_pressure(a);
  const auto w = energy_weight(a, pa);
  const auto fd = a.f - b.f;
  const auto ftd = surface_rate(a) - surface_rate(b);
  const auto e = detail::slope_energy(a, w, fd, ftd, s - 2.5);
  EnergyReport r;
  r.material = e.material;
  r.elastic = e.elastic;
  r.weighted = e.weighted;
  r.f_l2 = interface_sq(fd);
  r.ft_l2 = interface_sq(ftd);
  const auto flat = build_map(InterfaceField(a.f.n1(), a.f.n2()), a.grid());
  VectorField du = a.u;
  for (int i = 0; i < 3; ++i) du[i] -= b.u[i];
  Deformation dF = a.F;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) dF[j][i] -= b.F[j][i];
  r.u_hs = vector_sobolev_sq(du, flat, s - 1);
  r.F_hs = deformation_sobolev_sq(dF, flat, s - 1);
  r.weight_min = *std::min_element(w.data().begin(), w.data().end());
  r.weight_max = *std::max_element(w.data().begin(), w.data().end());
  return r;
}

/// ||curl u||^2_{L^2}, one of the div-curl ingredients emitted as a diagnostic.
inline double curl_sq(const VectorField& u, const CoordinateMap& map) {
  const auto j = mapped_jacobian(u, map);
  const BulkField c[3] = {j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]};
  return square_integral({&c[0], &c[1], &c[2]}, map);
}

}  // namespace elastoslab
