#pragma once

// Free-boundary elastodynamics on the mapped slab: state, pressure, projections, bulk and
// interface right-hand sides, and the explicit RK4 stepper (ALE form on the reference grid).

#include <array>
#include <memory>
#include <optional>

#include "elastoslab/dn.hpp"
#include "elastoslab/regions.hpp"

namespace elastoslab {

/// F_j columns: deformation[j][i] = F_{ij}.
using Deformation = std::array<VectorField, 3>;

struct FlowParams {
  int s = 4;
  double c0 = 0.1;
  Region gamma1;
  Region gamma2 = Region::whole();
  double div_threshold = 1e-6;
  bool reproject = true;
};

struct FlowState {
  double t = 0.0;
  InterfaceField f;
  VectorField u;
  Deformation F;
  double eps = 0.0;
  std::shared_ptr<const CoordinateMap> map;
  FlowParams params;
  /// d_t f, carried only by the second-order (theta) formulation.
  std::optional<InterfaceField> theta;

  const SlabGrid& grid() const { return map->grid(); }
};

/// Assembles a state on the map of f without projecting anything.
inline FlowState make_state(const InterfaceField& f, VectorField u, Deformation F, double eps, const SlabGrid& grid,
                            FlowParams params = {}) {
  FlowState st;
  st.f = f;
  st.map = std::make_shared<const CoordinateMap>(build_map(f, grid));
  for (auto* v : {&u[0], &u[1], &u[2]}) require_map(*v, *st.map);
  for (auto& col : F)
    for (auto& c : col) require_map(c, *st.map);
  st.u = std::move(u);
  st.F = std::move(F);
  st.eps = eps;
  st.params = std::move(params);
  return st;
}

inline Deformation zero_deformation(const SlabGrid& g) { return {zero_vector(g), zero_vector(g), zero_vector(g)}; }

/// Uniform columns F_j = cols[j].
inline Deformation uniform_deformation(const SlabGrid& g, const std::array<std::array<double, 3>, 3>& cols) {
  Deformation F;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) F[j][i] = BulkField(g, cols[j][i]);
  return F;
}

inline InterfaceField normal_trace(const VectorField& v, const InterfaceField& f) {
  const auto fr = normal_vector(f);
  return trace(v[0]) * fr.normal[0] + trace(v[1]) * fr.normal[1] + trace(v[2]);
}

/// P^div: v - grad q with Laplacian q = div v, q = 0 on the interface, d3 q = 0 at the bottom.
inline VectorField project_div(const VectorField& v, const CoordinateMap& map) {
  auto q = poisson_dirichlet(divergence(v, map), map);
  auto gq = mapped_gradient(q, map);
  VectorField out = v;
  for (int i = 0; i < 3; ++i) out[i] -= gq[i];
  out[2].set_level(0, bottom_trace(v[2]));
  return out;
}

/// P-bar^div: v - grad q with Laplacian q = div v, N . grad q = v . N - target on the interface and
/// d3 q = v3 at the bottom, so the output has normal trace target and v3 = 0 at the bottom.
inline VectorField project_div_normal(const VectorField& v, const CoordinateMap& map, const InterfaceField& target,
                                      double tol = 1e-6) {
  if (std::abs(target.mean()) > tol * (1.0 + target.max_abs()))
    throw Error(ErrorKind::ProjectionIncompatible, "target normal trace has mean " + std::to_string(target.mean()));
  // The remaining compatibility terms cancel by the divergence theorem; their discrete defect is
  // removed by the pure-Neumann solve.
  const auto div = divergence(v, map);
  auto q = solve_bvp(map, &div, {Boundary::Neumann, normal_trace(v, map.interface()) - target},
                     {Boundary::Neumann, bottom_trace(v[2])});
  auto gq = mapped_gradient(q, map);
  VectorField out = v;
  for (int i = 0; i < 3; ++i) out[i] -= gq[i];
  out[2].set_level(0, InterfaceField(map.grid().n1, map.grid().n2));
  return out;
}

/// Pressure split p = p_ring + p_bar, with p_ring = p_{u,u} - sum_j p_{F_j,F_j} (zero on the
/// interface) and p_bar = -eps H-bar N-bar^{-1} Laplacian' f.
struct Pressure {
  BulkField p, p_ring, p_bar;
  BulkField source;  ///< Laplacian of p_ring
};

inline BulkField pressure_source(const VectorField& u, const Deformation& F, const CoordinateMap& map) {
  BulkField src = -1.0 * gradient_trace_product(u, u, map);
  for (const auto& col : F) src += gradient_trace_product(col, col, map);
  return src;
}

inline Pressure assemble_pressure(const FlowState& st) {
  const auto& map = *st.map;
  Pressure pr;
  pr.source = pressure_source(st.u, st.F, map);
  pr.p_ring = poisson_dirichlet(pr.source, map);
  pr.p_bar = st.eps > 0.0 ? -st.eps * invert_dn_neumann_bulk(horizontal_laplacian(st.f), map) : BulkField(map.grid());
  pr.p_bar.map_hash = map.hash();
  pr.p = pr.p_ring + pr.p_bar;
  return pr;
}

/// Largest pointwise divergence over u and the F columns.
inline std::array<double, 2> divergence_residuals(const FlowState& st) {
  double fd = 0.0;
  for (const auto& col : st.F) fd = std::max(fd, divergence(col, *st.map).max_abs());
  return {divergence(st.u, *st.map).max_abs(), fd};
}

inline double normal_trace_residual(const FlowState& st) {
  double r = 0.0;
  for (const auto& col : st.F) r = std::max(r, normal_trace(col, st.f).max_abs());
  return r;
}

/// Mollifies f0 and moves (u0, F0) onto the new domain through the composed harmonic
/// coordinates (same reference point, new map), then projects the fields that violate the
/// constraints by more than params.div_threshold.
inline FlowState prepare_initial_data(const InterfaceField& f0, const VectorField& u0, const Deformation& F0, double eps,
                                      const SlabGrid& grid, FlowParams params = {}) {
  const auto fe = eps > 0.0 ? mollify(f0, eps) : f0;
  auto st = make_state(remove_mean(fe), u0, F0, eps, grid, std::move(params));
  for (auto* v : {&st.u[0], &st.u[1], &st.u[2]}) v->map_hash = st.map->hash();
  const double tol = st.params.div_threshold;
  if (divergence(st.u, *st.map).max_abs() > tol) st.u = project_div(st.u, *st.map);
  const InterfaceField zero(grid.n1, grid.n2);
  for (auto& col : st.F)
    if (divergence(col, *st.map).max_abs() > tol || normal_trace(col, st.f).max_abs() > tol ||
        bottom_trace(col[2]).max_abs() > 0.0)
      col = project_div_normal(col, *st.map, zero);
  return st;
}

/// d_t f = u . N on the interface, mean removed.
inline InterfaceField kinematic_rate(const FlowState& st) { return remove_mean(normal_trace(st.u, st.f)); }

/// d_t f used by the bulk grid velocity: theta when carried, otherwise kinematic.
inline InterfaceField surface_rate(const FlowState& st) { return st.theta ? *st.theta : kinematic_rate(st); }

struct BulkRates {
  VectorField du;
  Deformation dF;
};

/// Time derivatives at fixed reference point: physical rates plus (d_t phi) d_3 v.
inline BulkRates bulk_rhs(const FlowState& st, const Pressure& pr, const InterfaceField& dfdt) {
  const auto& map = *st.map;
  const auto& g = map.grid();
  const auto ju = mapped_jacobian(st.u, map);
  std::array<std::array<VectorField, 3>, 3> jF;
  for (int j = 0; j < 3; ++j) jF[j] = mapped_jacobian(st.F[j], map);
  const auto gp = mapped_gradient(pr.p, map);
  const auto w = extend_flat(dfdt, g);
  BulkRates r{zero_vector(g), zero_deformation(g)};
  for (std::size_t x = 0; x < w.size(); ++x) {
    const double u[3] = {st.u[0][x], st.u[1][x], st.u[2][x]};
    for (int i = 0; i < 3; ++i) {
      double acc = w[x] * ju[i][2][x] - gp[i][x];
      for (int k = 0; k < 3; ++k) {
        acc -= u[k] * ju[i][k][x];
        for (int j = 0; j < 3; ++j) acc += st.F[j][k][x] * jF[j][i][k][x];
      }
      r.du[i][x] = acc;
      for (int j = 0; j < 3; ++j) {
        double d = w[x] * jF[j][i][2][x];
        for (int k = 0; k < 3; ++k) d += st.F[j][k][x] * ju[i][k][x] - u[k] * jF[j][i][k][x];
        r.dF[j][i][x] = d;
      }
    }
  }
  const InterfaceField zero(g.n1, g.n2);
  r.du[2].set_level(0, zero);
  for (auto& col : r.dF) col[2].set_level(0, zero);
  for (auto* v : {&r.du[0], &r.du[1], &r.du[2]}) v->map_hash = map.hash();
  return r;
}

inline BulkRates bulk_rhs(const FlowState& st) { return bulk_rhs(st, assemble_pressure(st), surface_rate(st)); }

/// Horizontal rows of the boundary trace of F: traces[s][k] = F_{sk} on the interface, s = 0, 1.
inline std::array<std::array<InterfaceField, 3>, 2> deformation_traces(const Deformation& F) {
  std::array<std::array<InterfaceField, 3>, 2> t;
  for (int s = 0; s < 2; ++s)
    for (int k = 0; k < 3; ++k) t[s][k] = trace(F[k][s]);
  return t;
}

/// N . grad p_ring on the interface (consistent flux).
inline InterfaceField ring_normal_derivative(const Pressure& pr, const CoordinateMap& map) {
  return top_flux(pr.p_ring, &pr.source, map);
}

/// Right side of the second-order interface equation for theta = d_t f.
inline InterfaceField interface_theta_rhs(const FlowState& st, const Pressure& pr, const InterfaceField& theta) {
  const auto& f = st.f;
  const auto ub = vector_trace(st.u);
  const auto ft = deformation_traces(st.F);
  const InterfaceField d[2] = {horizontal_derivative(f, 1), horizontal_derivative(f, 2)};
  InterfaceField dd[2][2];
  for (int s = 0; s < 2; ++s)
    for (int r = 0; r < 2; ++r) dd[s][r] = horizontal_derivative(d[s], r + 1);
  InterfaceField out = -1.0 * ring_normal_derivative(pr, *st.map);
  for (int s = 0; s < 2; ++s) {
    out -= 2.0 * ub[s] * horizontal_derivative(theta, s + 1);
    for (int r = 0; r < 2; ++r) {
      InterfaceField gram(f.n1(), f.n2());
      for (int k = 0; k < 3; ++k) gram += ft[s][k] * ft[r][k];
      out += (gram - ub[s] * ub[r]) * dd[s][r];
    }
  }
  if (st.eps > 0.0) out += st.eps * horizontal_laplacian(f);
  return out;
}

inline InterfaceField interface_theta_rhs(const FlowState& st, const InterfaceField& theta) {
  return interface_theta_rhs(st, assemble_pressure(st), theta);
}

struct Rates {
  InterfaceField df;
  std::optional<InterfaceField> dtheta;
  BulkRates bulk;

  Rates& axpy(double a, const Rates& o) {
    df += a * o.df;
    if (dtheta) *dtheta += a * *o.dtheta;
    for (int i = 0; i < 3; ++i) bulk.du[i].axpy(a, o.bulk.du[i]);
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) bulk.dF[j][i].axpy(a, o.bulk.dF[j][i]);
    return *this;
  }
};

inline Rates evaluate_rates(const FlowState& st) {
  const auto pr = assemble_pressure(st);
  Rates r;
  r.df = surface_rate(st);
  if (st.theta) r.dtheta = remove_mean(interface_theta_rhs(st, pr, *st.theta));
  r.bulk = bulk_rhs(st, pr, r.df);
  return r;
}

/// base + h * k with the map rebuilt for the new interface.
inline FlowState displaced(const FlowState& base, double h, const Rates& k) {
  FlowState st = base;
  st.f = remove_mean(base.f + h * k.df);
  if (st.theta) st.theta = *base.theta + h * *k.dtheta;
  for (int i = 0; i < 3; ++i) st.u[i].axpy(h, k.bulk.du[i]);
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) st.F[j][i].axpy(h, k.bulk.dF[j][i]);
  st.map = std::make_shared<const CoordinateMap>(build_map(st.f, base.grid()));
  for (auto* v : {&st.u[0], &st.u[1], &st.u[2]}) v->map_hash = st.map->hash();
  for (auto& col : st.F)
    for (auto& c : col) c.map_hash = st.map->hash();
  st.t = base.t + h;
  return st;
}

/// Starts the second-order formulation from the kinematic rate.
inline FlowState with_theta(FlowState st) {
  st.theta = kinematic_rate(st);
  return st;
}

/// One classical RK4 step of (f, [theta,] u, F), then the ceiling check and drift re-projection.
inline FlowState step(const FlowState& st, double dt) {
  const Rates k1 = evaluate_rates(st);
  const Rates k2 = evaluate_rates(displaced(st, 0.5 * dt, k1));
  const Rates k3 = evaluate_rates(displaced(st, 0.5 * dt, k2));
  const Rates k4 = evaluate_rates(displaced(st, dt, k3));
  Rates sum = k1;
  sum.axpy(2.0, k2).axpy(2.0, k3).axpy(1.0, k4);
  FlowState next = displaced(st, dt / 6.0, sum);
  next.t = st.t + dt;
  const double ceiling = 1.0 - st.params.c0;
  if (next.f.max_abs() > ceiling)
    throw Error(ErrorKind::CeilingViolated,
                "|f| = " + std::to_string(next.f.max_abs()) + " exceeds " + std::to_string(ceiling));
  if (next.params.reproject) {
    const auto res = divergence_residuals(next);
    if (res[0] > next.params.div_threshold) next.u = project_div(next.u, *next.map);
    if (res[1] > next.params.div_threshold) {
      const InterfaceField zero(next.f.n1(), next.f.n2());
      for (auto& col : next.F) col = project_div_normal(col, *next.map, zero);
    }
  }
  return next;
}

/// -N . grad p on the interface.
inline InterfaceField taylor_normal_form(const FlowState& st, const Pressure& pr) {
  return -1.0 * (ring_normal_derivative(pr, *st.map) + top_flux(pr.p_bar, nullptr, *st.map));
}

/// dt <= 0.5 min(dx / max|u|, 1 / (k (max|F| + sqrt(eps k)) + sqrt(a k))) with a = max(c0, max Taylor).
inline double stable_dt_bound(const FlowState& st) {
  const auto& g = st.grid();
  const int n = std::max(g.n1, g.n2);
  const double dx = kTwoPi / n, kmax = n / 2;
  double umax = 0.0;
  for (std::size_t x = 0; x < st.u[0].size(); ++x)
    umax = std::max(umax, std::sqrt(st.u[0][x] * st.u[0][x] + st.u[1][x] * st.u[1][x] + st.u[2][x] * st.u[2][x]));
  const auto ft = deformation_traces(st.F);
  double fmax = 0.0;
  for (std::size_t x = 0; x < st.f.size(); ++x) {
    double s = 0.0;
    for (int r = 0; r < 2; ++r)
      for (int k = 0; k < 3; ++k) s += ft[r][k][x] * ft[r][k][x];
    fmax = std::max(fmax, std::sqrt(s));
  }
  const double a = std::max(st.params.c0, taylor_normal_form(st, assemble_pressure(st)).max());
  const double wave = kmax * (fmax + std::sqrt(st.eps * kmax)) + std::sqrt(a * kmax);
  const double transport = umax > 0.0 ? dx / umax : 1e300;
  return 0.5 * std::min(transport, 1.0 / wave);
}

}  // namespace elastoslab
