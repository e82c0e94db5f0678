#pragma once

// Harmonic coordinate y -> (y', phi(y)) from the flat reference slab to the fluid domain.

#include <array>
#include <cstdint>
#include <cstring>
#include <memory>

#include "elastoslab/flat_modes.hpp"
#include "elastoslab/slab_grid.hpp"
#include "elastoslab/spectral.hpp"

namespace elastoslab {

/// FNV-1a over the grid dimensions and the interface samples.
inline std::uint64_t interface_hash(const InterfaceField& f, const SlabGrid& g) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const int dims[4] = {g.n1, g.n2, g.nz, g.degree};
  mix(dims, sizeof dims);
  mix(f.values().data(), f.values().size() * sizeof(double));
  return h;
}

/// Normal N = (-d1 f, -d2 f, 1) and tangents tau1 = (1, 0, d1 f), tau2 = (0, 1, d2 f).
struct SurfaceFrame {
  std::array<InterfaceField, 3> normal;
  std::array<InterfaceField, 3> tau1;
  std::array<InterfaceField, 3> tau2;
  InterfaceField normal_sq;  ///< |N|^2 = 1 + |grad' f|^2
};

inline SurfaceFrame normal_vector(const InterfaceField& f) {
  const auto d1 = horizontal_derivative(f, 1), d2 = horizontal_derivative(f, 2);
  const auto zero = InterfaceField(f.n1(), f.n2());
  const auto one = InterfaceField::constant(f.n1(), f.n2(), 1.0);
  return {{-d1, -d2, one}, {one, zero, d1}, {zero, one, d2}, one + d1 * d1 + d2 * d2};
}

/// Immutable harmonic coordinate for one interface. Metric data is cached on nodes and on
/// the vertical quadrature levels used by the weak-form solvers.
class CoordinateMap {
 public:
  const SlabGrid& grid() const { return grid_; }
  const InterfaceField& interface() const { return f_; }
  const BulkField& phi() const { return phi_; }
  /// Reference derivatives of phi on nodes; index 0,1,2 for y1,y2,y3.
  const BulkField& dphi(int i) const { return dphi_[i]; }
  std::uint64_t hash() const { return hash_; }

  /// Metric on quadrature levels: G = J [[1,0,-a1],[0,1,-a2],[-a1,-a2,a1^2+a2^2+b^2]] with
  /// a_i = phi_i / phi_3, b = 1 / phi_3, J = phi_3. Stored as (J, -phi_1, -phi_2, G33).
  const std::vector<double>& jac_q() const { return jac_q_; }
  const std::vector<double>& g13_q() const { return g13_q_; }
  const std::vector<double>& g23_q() const { return g23_q_; }
  const std::vector<double>& g33_q() const { return g33_q_; }

  bool flat() const { return flat_; }

  friend CoordinateMap build_map(const InterfaceField& f, const SlabGrid& grid);

 private:
  SlabGrid grid_;
  InterfaceField f_;
  BulkField phi_;
  std::array<BulkField, 3> dphi_;
  std::vector<double> jac_q_, g13_q_, g23_q_, g33_q_;
  std::uint64_t hash_ = 0;
  bool flat_ = false;
};

/// Interpolates nodal values of a field to the vertical quadrature levels.
inline std::vector<double> to_quadrature(const BulkField& v) {
  const auto& g = v.grid();
  const auto& vs = VerticalScheme::get(g);
  const std::size_t np = g.plane();
  std::vector<double> out(static_cast<std::size_t>(vs.quad_levels()) * np, 0.0);
  for (int l = 0; l < vs.quad_levels(); ++l) {
    const int first = vs.element_first_node(l), q = vs.local_quad(l);
    double* dst = out.data() + l * np;
    for (int a = 0; a <= g.degree; ++a) {
      const double c = vs.basis(q, a);
      auto src = v.level(first + a);
      for (std::size_t j = 0; j < np; ++j) dst[j] += c * src[j];
    }
  }
  return out;
}

/// y3-derivative of a nodal field evaluated on the quadrature levels (exact for the element basis).
inline std::vector<double> to_quadrature_dz(const BulkField& v) {
  const auto& g = v.grid();
  const auto& vs = VerticalScheme::get(g);
  const std::size_t np = g.plane();
  std::vector<double> out(static_cast<std::size_t>(vs.quad_levels()) * np, 0.0);
  for (int l = 0; l < vs.quad_levels(); ++l) {
    const int first = vs.element_first_node(l), q = vs.local_quad(l);
    double* dst = out.data() + l * np;
    for (int a = 0; a <= g.degree; ++a) {
      const double c = vs.dbasis(q, a);
      auto src = v.level(first + a);
      for (std::size_t j = 0; j < np; ++j) dst[j] += c * src[j];
    }
  }
  return out;
}

/// Builds the harmonic coordinate: phi = y3 + (flat discrete harmonic extension of f, zero at the bottom).
inline CoordinateMap build_map(const InterfaceField& f, const SlabGrid& grid) {
  grid.validate();
  if (f.n1() != grid.n1 || f.n2() != grid.n2) throw Error(ErrorKind::GridMismatch, "interface does not match slab grid");
  if (f.max_abs() >= 1.0) throw Error(ErrorKind::DegenerateMap, "|f| >= 1 leaves the slab");
  CoordinateMap map;
  map.grid_ = grid;
  map.f_ = f;
  map.flat_ = f.max_abs() == 0.0;
  map.hash_ = interface_hash(f, grid);
  map.phi_ = extend_flat(f, grid);
  for (int m = 0; m < grid.levels(); ++m) {
    auto l = map.phi_.level(m);
    for (auto& x : l) x += grid.y3(m);
  }
  map.phi_.set_level(grid.nz, f);
  map.phi_.map_hash = map.hash_;
  map.dphi_ = {horizontal_derivative(map.phi_, 1), horizontal_derivative(map.phi_, 2), vertical_derivative(map.phi_)};
  const auto p1 = to_quadrature(map.dphi_[0]);
  const auto p2 = to_quadrature(map.dphi_[1]);
  const auto p3 = to_quadrature_dz(map.phi_);
  double lowest = 1e300;
  for (double v : map.dphi_[2].data()) lowest = std::min(lowest, v);
  for (double v : p3) lowest = std::min(lowest, v);
  if (!(lowest > 0.0)) throw Error(ErrorKind::DegenerateMap, "d phi / d y3 reaches " + std::to_string(lowest));
  const std::size_t n = p3.size();
  map.jac_q_ = p3;
  map.g13_q_.resize(n);
  map.g23_q_.resize(n);
  map.g33_q_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    map.g13_q_[j] = -p1[j];
    map.g23_q_[j] = -p2[j];
    map.g33_q_[j] = (1.0 + p1[j] * p1[j] + p2[j] * p2[j]) / p3[j];
  }
  return map;
}

/// Samples fn(x1, x2, x3) at the physical points (y', phi(y)) of every node.
template <class Fn>
BulkField sample_physical(const CoordinateMap& map, Fn&& fn) {
  const auto& g = map.grid();
  BulkField v(g);
  for (int m = 0; m < g.levels(); ++m)
    for (int i1 = 0; i1 < g.n1; ++i1)
      for (int i2 = 0; i2 < g.n2; ++i2)
        v.at(m, i1, i2) = fn(InterfaceField::grid_x(i1, g.n1), InterfaceField::grid_x(i2, g.n2), map.phi().at(m, i1, i2));
  v.map_hash = map.hash();
  return v;
}

inline void require_map(const BulkField& v, const CoordinateMap& map) {
  if (!(v.grid() == map.grid())) throw Error(ErrorKind::GridMismatch, "field grid differs from map grid");
}

/// Physical gradient of a reference-grid field through the chain rule of the map.
inline VectorField mapped_gradient(const BulkField& v, const CoordinateMap& map) {
  require_map(v, map);
  VectorField out{horizontal_derivative(v, 1), horizontal_derivative(v, 2), vertical_derivative(v)};
  const auto& p1 = map.dphi(0).data();
  const auto& p2 = map.dphi(1).data();
  const auto& p3 = map.dphi(2).data();
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double d3 = out[2][j] / p3[j];
    out[0][j] -= p1[j] * d3;
    out[1][j] -= p2[j] * d3;
    out[2][j] = d3;
  }
  for (auto& c : out) c.map_hash = map.hash();
  return out;
}

/// Physical divergence of a vector field.
inline BulkField divergence(const VectorField& v, const CoordinateMap& map) {
  BulkField out(map.grid());
  for (int i = 0; i < 3; ++i) out += mapped_gradient(v[i], map)[i];
  out.map_hash = map.hash();
  return out;
}

/// Full Jacobian dv_i/dx_j of a vector field, indexed [i][j].
inline std::array<VectorField, 3> mapped_jacobian(const VectorField& v, const CoordinateMap& map) {
  return {mapped_gradient(v[0], map), mapped_gradient(v[1], map), mapped_gradient(v[2], map)};
}

}  // namespace elastoslab
