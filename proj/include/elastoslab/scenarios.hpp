#pragma once

// Named initial-data presets.

#include <string>
#include <vector>

#include "elastoslab/dynamics.hpp"

namespace elastoslab {

struct ScenarioOptions {
  double amplitude = 1e-3;  ///< interface amplitude (velocity scale for mixed-regions)
  double c = 1.0;           ///< background F_{11} = F_{22}
  double eps = 0.0;
  double c0 = 0.1;
  int s = 4;
  Region gamma1;
  Region gamma2 = Region::whole();
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"rest", "elastic-mode", "eps-mode", "combined", "mixed-regions",
                                                 "perturbed"};
  return names;
}

/// Preset defaults; callers override individual fields afterwards.
inline ScenarioOptions default_options(const std::string& name) {
  ScenarioOptions o;
  if (name == "eps-mode") {
    o.c = 0.0;
    o.eps = 0.25;
  } else if (name == "combined") {
    o.eps = 0.25;
  } else if (name == "mixed-regions") {
    // Taylor coefficient peaks at x1 = 0, pi and Lambda vanishes there, so each condition holds only on its own region.
    o.amplitude = 0.6;
    o.c0 = 0.49;
    const double pi = kTwoPi / 2;
    o.gamma1 = {{Rect{-0.6, 0.6, 0.0, kTwoPi}, Rect{pi - 0.6, pi + 0.6, 0.0, kTwoPi}}};
    o.gamma2 = {{Rect{0.7, pi - 0.7, 0.0, kTwoPi}, Rect{pi + 0.7, kTwoPi - 0.7, 0.0, kTwoPi}}};
  } else if (name == "perturbed") {
    o.amplitude = 0.05;
    o.eps = 0.05;
  }
  return o;
}

/// Unprojected initial data of a preset.
struct InitialData {
  InterfaceField f;
  VectorField u;
  Deformation F;
  double eps = 0.0;
  FlowParams params;

  FlowState prepare(const SlabGrid& grid) const { return prepare_initial_data(f, u, F, eps, grid, params); }
};

inline InitialData scenario_data(const std::string& name, const SlabGrid& grid, const ScenarioOptions& o) {
  FlowParams params;
  params.s = o.s;
  params.c0 = o.c0;
  params.gamma1 = o.gamma1;
  params.gamma2 = o.gamma2;
  const int n1 = grid.n1, n2 = grid.n2;
  const double a = o.amplitude, c = o.c;
  const auto background = uniform_deformation(grid, {{{c, 0, 0}, {0, c, 0}, {0, 0, 0}}});
  auto single_mode = InterfaceField::sample(n1, n2, [&](double x1, double) { return a * std::cos(x1); });
  if (name == "rest")
    return {InterfaceField(n1, n2), zero_vector(grid), zero_deformation(grid), o.eps, params};
  if (name == "elastic-mode")
    return {single_mode, zero_vector(grid), background, o.eps, params};
  if (name == "eps-mode")
    return {single_mode, zero_vector(grid), zero_deformation(grid), o.eps, params};
  if (name == "combined") return {single_mode, zero_vector(grid), background, o.eps, params};
  if (name == "mixed-regions") {
    // Flat interface, potential flow u = grad(cos x1 cosh(x3 + 1) / cosh 1), F_1 = e1, F_2 = 2 sin^2(x1) e2.
    const InterfaceField flat(n1, n2);
    const auto map = build_map(flat, grid);
    const double ch = std::cosh(1.0);
    VectorField u{sample_physical(map, [&](double x1, double, double x3) { return -a * std::sin(x1) * std::cosh(x3 + 1) / ch; }),
                  BulkField(grid),
                  sample_physical(map, [&](double x1, double, double x3) { return a * std::cos(x1) * std::sinh(x3 + 1) / ch; })};
    auto F = zero_deformation(grid);
    F[0][0] = BulkField(grid, 1.0);
    F[1][1] = sample_physical(map, [](double x1, double, double) { return 2.0 * std::sin(x1) * std::sin(x1); });
    return {flat, u, F, o.eps, params};
  }
  if (name == "perturbed") {
    auto f0 = InterfaceField::sample(n1, n2, [&](double x1, double x2) {
      return a * (std::cos(x1) + 0.6 * std::sin(x1 + x2) + 0.4 * std::cos(2 * x2));
    });
    const auto map = build_map(f0, grid);
    VectorField u{sample_physical(map, [&](double x1, double x2, double x3) { return a * (0.3 * std::sin(x2) + 0.2 * std::cos(x1 + x3)); }),
                  sample_physical(map, [&](double x1, double, double x3) { return a * 0.2 * std::cos(x1) * (x3 + 1); }),
                  sample_physical(map, [&](double x1, double, double x3) { return a * 0.1 * std::sin(x1) * (x3 + 1) * (x3 + 1); })};
    auto F = background;
    F[0][0] += sample_physical(map, [&](double, double x2, double x3) { return a * std::sin(x2) * (x3 + 1); });
    F[1][0] += sample_physical(map, [&](double, double x2, double x3) { return a * 0.5 * std::cos(x2 + x3); });
    F[1][1] += sample_physical(map, [&](double x1, double, double) { return a * 0.7 * std::cos(x1); });
    return {f0, u, F, o.eps, params};
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown scenario '" + name + "'");
}

inline FlowState make_scenario(const std::string& name, const SlabGrid& grid, const ScenarioOptions& o) {
  return scenario_data(name, grid, o).prepare(grid);
}

inline FlowState make_scenario(const std::string& name, const SlabGrid& grid) {
  return make_scenario(name, grid, default_options(name));
}

}  // namespace elastoslab
