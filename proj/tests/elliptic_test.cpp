#include <gtest/gtest.h>

#include "elastoslab/elliptic.hpp"
#include "test_support.hpp"

using namespace elastoslab;
using testing_support::smooth_random;

namespace {

CoordinateMap flat_map(int n, int nz, int p = 8) { return build_map(InterfaceField(n, n), SlabGrid{n, n, nz, p}); }

InterfaceField cos1(int n) {
  return InterfaceField::sample(n, n, [](double x1, double) { return std::cos(x1); });
}

template <class Fn>
double max_err(const BulkField& v, Fn&& exact) {
  return (v - BulkField::sample(v.grid(), exact)).max_abs();
}

}  // namespace

TEST(Elliptic, DirichletExtensionExamples) {
  auto map = flat_map(16, 16);
  EXPECT_EQ(harmonic_ext_dirichlet(InterfaceField(16, 16), map).max_abs(), 0.0);
  auto h = harmonic_ext_dirichlet(cos1(16), map);
  EXPECT_LT(max_err(h, [](double x1, double, double y) { return std::cos(x1) * std::sinh(y + 1) / std::sinh(1.0); }), 1e-10);
  EXPECT_LT((trace(h) - cos1(16)).max_abs(), 1e-15);
  EXPECT_EQ(bottom_trace(h).max_abs(), 0.0);
}

TEST(Elliptic, DirichletExtensionMaximumPrinciple) {
  std::mt19937_64 rng(21);
  auto grid = SlabGrid::make(16, 16, 16);
  for (int t = 0; t < 100; ++t) {
    auto map = build_map(smooth_random(16, 3, 0.1, rng), grid);
    auto g = smooth_random(16, 3, 1.0, rng, true);
    auto h = harmonic_ext_dirichlet(g, map);
    const double lo = std::min(g.min(), 0.0), hi = std::max(g.max(), 0.0);
    double worst = 0.0;
    for (double v : h.data()) worst = std::max({worst, lo - v, v - hi});
    EXPECT_LT(worst, 1e-3) << t;
  }
}

TEST(Elliptic, NeumannExtensionExamples) {
  auto map = flat_map(16, 16);
  auto c = harmonic_ext_neumann(InterfaceField::constant(16, 16, 2.5), map);
  EXPECT_LT((c - BulkField(map.grid(), 2.5)).max_abs(), 1e-12);
  auto h = harmonic_ext_neumann(cos1(16), map);
  EXPECT_LT(max_err(h, [](double x1, double, double y) { return std::cos(x1) * std::cosh(y + 1) / std::cosh(1.0); }), 1e-10);
  std::mt19937_64 rng(22);
  auto curved = build_map(smooth_random(16, 3, 0.2, rng), SlabGrid::make(16, 16, 16));
  SolveInfo info;
  solve_bvp(curved, nullptr, {Boundary::Dirichlet, smooth_random(16, 4, 1.0, rng)}, {Boundary::Neumann, std::nullopt}, &info);
  EXPECT_LT(info.residual, 1e-10);
  EXPECT_GT(info.iterations, 1);
}

TEST(Elliptic, PoissonNeumannBottomExamples) {
  auto map = flat_map(16, 16);
  EXPECT_EQ(poisson_dirichlet(BulkField(map.grid()), map).max_abs(), 0.0);
  auto rhs = BulkField::sample(map.grid(), [](double x1, double, double) { return std::cos(x1); });
  EXPECT_LT(max_err(poisson_dirichlet(rhs, map),
                    [](double x1, double, double y) { return std::cos(x1) * (std::cosh(y + 1) / std::cosh(1.0) - 1.0); }),
            1e-10);
  EXPECT_LT(max_err(poisson_dirichlet(BulkField(map.grid(), 1.0), map), [](double, double, double y) { return y * y / 2 + y; }),
            1e-12);
}

TEST(Elliptic, PoissonDirichletBothExamples) {
  auto map = flat_map(16, 16);
  EXPECT_EQ(poisson_dirichlet_both(BulkField(map.grid()), map).max_abs(), 0.0);
  auto rhs = BulkField::sample(map.grid(), [](double x1, double, double) { return std::cos(x1); });
  EXPECT_LT(max_err(poisson_dirichlet_both(rhs, map),
                    [](double x1, double, double y) { return std::cos(x1) * (std::cosh(y + 0.5) / std::cosh(0.5) - 1.0); }),
            1e-10);
  EXPECT_LT(max_err(poisson_dirichlet_both(BulkField(map.grid(), 1.0), map), [](double, double, double y) { return y * (y + 1) / 2; }),
            1e-12);
}

TEST(Elliptic, FlatSolvesConvergeAtSecondOrderOrBetter) {
  auto exact = [](double x1, double, double y) { return std::cos(x1) * (std::cosh(y + 1) / std::cosh(1.0) - 1.0); };
  double err[2];
  for (int r = 0; r < 2; ++r) {
    auto map = flat_map(8, 4 << r, 1);
    auto rhs = BulkField::sample(map.grid(), [](double x1, double, double) { return std::cos(x1); });
    err[r] = max_err(poisson_dirichlet(rhs, map), exact);
  }
  EXPECT_GE(std::log2(err[0] / err[1]), 1.9);
}

TEST(Elliptic, Linearity) {
  std::mt19937_64 rng(23);
  auto map = build_map(smooth_random(16, 3, 0.15, rng), SlabGrid::make(16, 16, 16));
  auto r1 = BulkField::sample(map.grid(), [](double x1, double x2, double y) { return std::sin(x1 + 2 * x2) * (1 + y * y); });
  auto r2 = BulkField::sample(map.grid(), [](double x1, double, double y) { return std::cos(3 * x1) * y; });
  for (auto solve : {poisson_dirichlet, poisson_dirichlet_both}) {
    auto lhs = solve(2.0 * r1 + (-3.0) * r2, map);
    auto rhs = 2.0 * solve(r1, map) + (-3.0) * solve(r2, map);
    EXPECT_LT((lhs - rhs).max_abs(), 1e-10 * lhs.max_abs());
  }
}

TEST(Elliptic, PressureBilinearExamples) {
  auto map = flat_map(16, 16);
  const auto& g = map.grid();
  auto zero = zero_vector(g);
  VectorField v{BulkField::sample(g, [](double x1, double x2, double y) { return std::sin(x1) * std::cos(x2) * y; }),
                BulkField(g), BulkField(g)};
  EXPECT_EQ(pressure_bilinear(v, zero, map).max_abs(), 0.0);
  VectorField rigid{BulkField(g, 1.0), BulkField(g), BulkField(g)};
  EXPECT_LT(pressure_bilinear(rigid, rigid, map).max_abs(), 1e-14);
  VectorField shear{BulkField::sample(g, [](double, double, double y) { return std::sin(y); }), BulkField(g), BulkField(g)};
  EXPECT_LT(pressure_bilinear(shear, shear, map).max_abs(), 1e-14);
}

TEST(Elliptic, WeightFieldExamples) {
  auto map = flat_map(16, 16);
  const double c0 = 0.3;
  auto w = weight_field(InterfaceField::constant(16, 16, c0), InterfaceField(16, 16), 0.5, c0, map);
  EXPECT_LT((w - BulkField(map.grid(), c0)).max_abs(), 1e-12);
  auto a = weight_field(InterfaceField(16, 16), InterfaceField::constant(16, 16, 1.0), 2 * c0, c0, map);
  EXPECT_LT(max_err(a, [&](double, double, double y) { return c0 + c0 * (y + 1); }), 1e-12);
  EXPECT_THROW(weight_field(InterfaceField(16, 16), InterfaceField(16, 16), 0.0, c0, map), Error);
  std::mt19937_64 rng(24);
  for (int t = 0; t < 20; ++t) {
    auto m = build_map(smooth_random(16, 3, 0.1, rng), map.grid());
    auto taylor = smooth_random(16, 3, 0.5, rng, true) + 0.8;
    auto cut = smooth_random(16, 2, 0.5, rng, true) + 0.5;
    const double ct = weight_constant(taylor, InterfaceField::constant(16, 16, 1.0), c0);
    EXPECT_NO_THROW(weight_field(taylor, cut, ct, c0, m, 1e-3));
  }
}

TEST(Elliptic, ConsistentFluxesMatchAnalyticDerivatives) {
  auto map = flat_map(16, 16);
  auto h = harmonic_ext_neumann(cos1(16), map);
  auto want = std::tanh(1.0) * cos1(16);
  EXPECT_LT((top_flux(h, nullptr, map) - want).max_abs(), 1e-10);
  auto hd = harmonic_ext_dirichlet(cos1(16), map);
  EXPECT_LT((bottom_flux(hd, nullptr, map) - (1.0 / std::sinh(1.0)) * cos1(16)).max_abs(), 1e-10);
}

TEST(Elliptic, CorruptedSolverLeavesResidual) {
  std::mt19937_64 rng(25);
  auto map = build_map(smooth_random(16, 3, 0.2, rng), SlabGrid::make(16, 16, 16));
  auto g = smooth_random(16, 4, 1.0, rng);
  auto good = harmonic_ext_dirichlet(g, map);
  SolverSettings bad;
  bad.truncate_after = 1;
  ScopedSolverSettings scope(bad);
  auto poor = harmonic_ext_dirichlet(g, map);
  EXPECT_GT((good - poor).max_abs(), 1e-6);
}
