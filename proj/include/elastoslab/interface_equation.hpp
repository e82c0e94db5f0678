#pragma once

// Second-order evolution of the interface slopes d_i f and the material derivative of the pressure.

#include <array>
#include <vector>

#include "elastoslab/dynamics.hpp"

namespace elastoslab {

/// Right-hand-side terms of the slope equation, in display order.
enum AccelTerm : int {
  kPressureNormal,  ///< d3 p_ring N . grad H_f(d_i f)
  kElasticSecond,   ///< sum_k D_{F_k}^2 d_i f
  kCapillary,       ///< eps Laplacian' d_i f
  kElasticCross,    ///< sum_k 2 (d_i F_sk) D_{F_k} d_s f
  kVelocityCross,   ///< -2 (d_i u_j) D_t d_j f
  kAuxPressure,     ///< -N . grad q_i
  kBarPressure1,    ///< -d_1 d_i f d_1 p_bar
  kBarPressure2,    ///< -d_2 d_i f d_2 p_bar
  kAccelTermCount
};

inline constexpr unsigned kAllAccelTerms = (1u << kAccelTermCount) - 1;

inline const char* accel_term_name(int t) {
  static constexpr const char* names[] = {"pressure_normal", "elastic_second", "capillary",      "elastic_cross",
                                          "velocity_cross",  "aux_pressure",   "bar_pressure_1", "bar_pressure_2"};
  return names[t];
}

/// terms[t][i]: term t of the equation for d_{i+1} f.
using AccelTerms = std::array<std::array<InterfaceField, 2>, kAccelTermCount>;

inline AccelTerms accel_terms(const FlowState& st, const Pressure& pr) {
  const auto& map = *st.map;
  const auto& f = st.f;
  const int n1 = f.n1(), n2 = f.n2();
  const InterfaceField d[2] = {horizontal_derivative(f, 1), horizontal_derivative(f, 2)};
  const auto ub = vector_trace(st.u);
  const auto ft = deformation_traces(st.F);
  const auto fr = normal_vector(f);
  const auto d3_ring = ring_normal_derivative(pr, map) * fr.normal_sq.map([](double v) { return 1.0 / v; });
  const auto g_ring = mapped_gradient(pr.p_ring, map);
  VectorField g_bar = zero_vector(map.grid());
  if (st.eps > 0.0) g_bar = mapped_gradient(pr.p_bar, map);
  auto dF = [&](int k, const InterfaceField& h) {
    return ft[0][k] * horizontal_derivative(h, 1) + ft[1][k] * horizontal_derivative(h, 2);
  };
  InterfaceField dt_slope[2];
  for (int j = 0; j < 2; ++j) {
    dt_slope[j] = InterfaceField(n1, n2);
    for (int c = 0; c < 3; ++c) dt_slope[j] += horizontal_derivative(ub[c], j + 1) * fr.normal[c];
  }
  AccelTerms out;
  for (int i = 0; i < 2; ++i) {
    const auto& g = d[i];
    const auto ext = harmonic_ext_dirichlet(g, map);
    out[kPressureNormal][i] = d3_ring * top_flux(ext, nullptr, map);
    out[kElasticSecond][i] = InterfaceField(n1, n2);
    out[kElasticCross][i] = InterfaceField(n1, n2);
    for (int k = 0; k < 3; ++k) {
      out[kElasticSecond][i] += dF(k, dF(k, g));
      for (int s = 0; s < 2; ++s) out[kElasticCross][i] += 2.0 * horizontal_derivative(ft[s][k], i + 1) * dF(k, d[s]);
    }
    out[kCapillary][i] = st.eps * horizontal_laplacian(g);
    out[kVelocityCross][i] = InterfaceField(n1, n2);
    for (int j = 0; j < 2; ++j) out[kVelocityCross][i] -= 2.0 * horizontal_derivative(ub[j], i + 1) * dt_slope[j];
    const auto q = g_ring[i] + g_ring[2] * ext;
    const auto gq = mapped_gradient(q, map);
    out[kAuxPressure][i] = -1.0 * (trace(gq[0]) * fr.normal[0] + trace(gq[1]) * fr.normal[1] + trace(gq[2]));
    out[kBarPressure1][i] = -1.0 * horizontal_derivative(g, 1) * trace(g_bar[0]);
    out[kBarPressure2][i] = -1.0 * horizontal_derivative(g, 2) * trace(g_bar[1]);
  }
  return out;
}

/// Sum of the selected terms for i = 1, 2.
inline std::array<InterfaceField, 2> interface_accel_rhs(const FlowState& st, const Pressure& pr,
                                                         unsigned mask = kAllAccelTerms) {
  const auto terms = accel_terms(st, pr);
  std::array<InterfaceField, 2> out{InterfaceField(st.f.n1(), st.f.n2()), InterfaceField(st.f.n1(), st.f.n2())};
  for (int t = 0; t < kAccelTermCount; ++t)
    if (mask & (1u << t))
      for (int i = 0; i < 2; ++i) out[i] += terms[t][i];
  return out;
}

inline std::array<InterfaceField, 2> interface_accel_rhs(const FlowState& st, unsigned mask = kAllAccelTerms) {
  return interface_accel_rhs(st, assemble_pressure(st), mask);
}

/// D_t^2 d_i f from five states at uniform spacing centred on the middle one (fourth-order
/// stencils in time at fixed x').
inline std::array<InterfaceField, 2> material_slope_acceleration(const std::vector<FlowState>& traj) {
  if (traj.size() < 5) throw Error(ErrorKind::InsufficientHistory, "need 5 states, have " + std::to_string(traj.size()));
  const std::size_t c = traj.size() / 2;
  const double h = traj[c + 1].t - traj[c].t;
  for (std::size_t k = c - 2; k < c + 2; ++k)
    if (std::abs(traj[k + 1].t - traj[k].t - h) > 1e-9 * std::abs(h))
      throw Error(ErrorKind::PreconditionViolated, "trajectory is not uniformly spaced");
  auto d1 = [&](auto get) {
    return (1.0 / (12 * h)) * (get(traj[c - 2]) - 8.0 * get(traj[c - 1]) + 8.0 * get(traj[c + 1]) - get(traj[c + 2]));
  };
  auto d2 = [&](auto get) {
    return (1.0 / (12 * h * h)) * (16.0 * (get(traj[c - 1]) + get(traj[c + 1])) - get(traj[c - 2]) - get(traj[c + 2]) -
                                   30.0 * get(traj[c]));
  };
  const auto& mid = traj[c];
  const auto ub = vector_trace(mid.u);
  std::array<InterfaceField, 2> dub;
  for (int s = 0; s < 2; ++s) {
    dub[s] = d1([&](const FlowState& x) { return trace(x.u[s]); });
    for (int r = 0; r < 2; ++r) dub[s] += ub[r] * horizontal_derivative(ub[s], r + 1);
  }
  std::array<InterfaceField, 2> out;
  for (int i = 0; i < 2; ++i) {
    auto slope = [i](const FlowState& x) { return horizontal_derivative(x.f, i + 1); };
    const auto g = slope(mid);
    const auto gt = d1(slope);
    out[i] = d2(slope);
    for (int s = 0; s < 2; ++s) {
      out[i] += 2.0 * ub[s] * horizontal_derivative(gt, s + 1) + dub[s] * horizontal_derivative(g, s + 1);
      for (int r = 0; r < 2; ++r) out[i] += ub[s] * ub[r] * horizontal_derivative(horizontal_derivative(g, s + 1), r + 1);
    }
  }
  return out;
}

/// Relative L2 mismatch between D_t^2 d_i f along the trajectory and the selected right-hand side.
inline double evo_residual(const std::vector<FlowState>& traj, unsigned mask = kAllAccelTerms) {
  const auto lhs = material_slope_acceleration(traj);
  const auto rhs = interface_accel_rhs(traj[traj.size() / 2], mask);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 2; ++i) {
    num += inner(lhs[i] - rhs[i], lhs[i] - rhs[i]);
    den += inner(lhs[i], lhs[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

/// D_t p from its Poisson problem: Laplacian D_t p = D_t S + Laplacian u . grad p + 2 d_k u_s d_k d_s p,
/// D_t p = -eps D_t N-bar^{-1} Laplacian' f on the interface, d3 D_t p = d3 u_1 d1 p + d3 u_2 d2 p at the bottom.
inline BulkField material_pressure_derivative(const FlowState& st, const Pressure& pr) {
  const auto& map = *st.map;
  const auto& g = map.grid();
  const auto ju = mapped_jacobian(st.u, map);
  std::array<std::array<VectorField, 3>, 3> jF;
  for (int l = 0; l < 3; ++l) jF[l] = mapped_jacobian(st.F[l], map);
  const auto gp = mapped_gradient(pr.p, map);
  const auto hp = mapped_hessian(pr.p, map);
  const auto lap_u = mapped_vector_laplacian(st.u, map);
  // a = D_t u, b_l = D_t F_l along the flow.
  VectorField a = zero_vector(g);
  Deformation b = zero_deformation(g);
  for (std::size_t x = 0; x < a[0].size(); ++x)
    for (int i = 0; i < 3; ++i) {
      double ai = -gp[i][x];
      for (int l = 0; l < 3; ++l)
        for (int k = 0; k < 3; ++k) {
          ai += st.F[l][k][x] * jF[l][i][k][x];
          b[l][i][x] += st.F[l][k][x] * ju[i][k][x];
        }
      a[i][x] = ai;
    }
  const auto ja = mapped_jacobian(a, map);
  std::array<std::array<VectorField, 3>, 3> jb;
  for (int l = 0; l < 3; ++l) jb[l] = mapped_jacobian(b[l], map);
  BulkField rhs(g);
  for (std::size_t x = 0; x < rhs.size(); ++x) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double cube = 0.0;
        for (int k = 0; k < 3; ++k) cube += ju[j][k][x] * ju[k][i][x];
        s += -2.0 * ja[i][j][x] * ju[j][i][x] + 2.0 * cube * ju[i][j][x];
        for (int l = 0; l < 3; ++l) {
          double adv = 0.0;
          for (int k = 0; k < 3; ++k) adv += ju[k][j][x] * jF[l][i][k][x];
          s += 2.0 * (jb[l][i][j][x] - adv) * jF[l][j][i][x];
        }
        s += 2.0 * ju[j][i][x] * hp[i][j][x];
      }
    for (int i = 0; i < 3; ++i) s += lap_u[i][x] * gp[i][x];
    rhs[x] = s;
  }
  InterfaceField top(g.n1, g.n2);
  if (st.eps > 0.0) {
    const auto lap_f = horizontal_laplacian(st.f);
    const auto w = trace(pr.p_bar) * (-1.0 / st.eps);
    const auto ub = vector_trace(st.u);
    auto dt_lap = horizontal_laplacian(surface_rate(st));
    InterfaceField drift(g.n1, g.n2);
    for (int s = 0; s < 2; ++s) {
      dt_lap += ub[s] * horizontal_derivative(lap_f, s + 1);
      drift += ub[s] * horizontal_derivative(w, s + 1);
    }
    const auto h = remove_mean(dt_lap - material_dn_commutator(w, st.u, map));
    top = -st.eps * (invert_dn_neumann(h, map) + drift.mean());
  }
  InterfaceField bottom(g.n1, g.n2);
  for (int s = 0; s < 2; ++s) bottom += bottom_trace(ju[s][2]) * bottom_trace(gp[s]);
  return solve_bvp(map, &rhs, {Boundary::Dirichlet, top}, {Boundary::Neumann, bottom});
}

inline BulkField material_pressure_derivative(const FlowState& st) {
  return material_pressure_derivative(st, assemble_pressure(st));
}

}  // namespace elastoslab
