#include <gtest/gtest.h>

#include <cmath>

#include "elastoslab/slab_grid.hpp"

using namespace elastoslab;

TEST(SlabGrid, NodesAndValidation) {
  SlabGrid g{8, 8, 16, 4};
  g.validate();
  EXPECT_EQ(g.y3(0), -1.0);
  EXPECT_EQ(g.y3(g.nz), 0.0);
  for (int m = 1; m <= g.nz; ++m) EXPECT_GT(g.y3(m), g.y3(m - 1));
  EXPECT_THROW((SlabGrid{8, 8, 10, 4}.validate()), Error);
  EXPECT_THROW((SlabGrid{2, 8, 8, 4}.validate()), Error);
}

TEST(VerticalScheme, QuadratureAndMatrices) {
  for (int p : {1, 2, 4, 8}) {
    const auto& vs = VerticalScheme::get(16, p);
    // Integrates y^(2p+3) exactly on [-1, 0].
    double s = 0.0;
    const int deg = 2 * p + 3;
    for (int l = 0; l < vs.quad_levels(); ++l) s += vs.quad_weight(l) * std::pow(vs.quad_y(l), deg);
    EXPECT_NEAR(s, (deg % 2 ? -1.0 : 1.0) / (deg + 1), 1e-13) << p;
    double total = 0.0;
    for (int m = 0; m <= 16; ++m) total += vs.nodal_weight(m);
    EXPECT_NEAR(total, 1.0, 1e-13);
    // Constants lie in the stiffness kernel; y K y = integral of 1.
    double yKy = 0.0;
    for (int a = 0; a <= 16; ++a) {
      double row = 0.0;
      for (int b = 0; b <= 16; ++b) {
        row += vs.stiffness(a, b);
        yKy += (-1.0 + a / 16.0) * vs.stiffness(a, b) * (-1.0 + b / 16.0);
      }
      EXPECT_NEAR(row, 0.0, 1e-11);
    }
    EXPECT_NEAR(yKy, 1.0, 1e-12);
  }
}

TEST(VerticalScheme, DifferenceExactOnPolynomials) {
  const int p = 4;
  SlabGrid g{4, 4, 16, p};
  auto v = BulkField::sample(g, [](double, double, double y) { return std::pow(y, 4) - 2 * y * y + y; });
  auto dv = vertical_derivative(v);
  for (int m = 0; m <= g.nz; ++m) {
    const double y = g.y3(m);
    EXPECT_NEAR(dv.at(m, 1, 2), 4 * std::pow(y, 3) - 4 * y + 1, 1e-11);
  }
}

TEST(BulkField, TracesAndDerivatives) {
  SlabGrid g{16, 16, 8, 4};
  auto y = BulkField::sample(g, [](double, double, double y3) { return y3; });
  EXPECT_EQ(trace(y).max_abs(), 0.0);
  EXPECT_LT((bottom_trace(y) + 1.0).max_abs(), 1e-15);
  auto s = BulkField::sample(g, [](double x1, double, double y3) { return std::sin(x1) * (1 + y3); });
  auto ds = horizontal_derivative(s, 1);
  auto want = BulkField::sample(g, [](double x1, double, double y3) { return std::cos(x1) * (1 + y3); });
  EXPECT_LT((ds - want).max_abs(), 1e-13);
  EXPECT_THROW(y + BulkField(SlabGrid{8, 8, 8, 4}), Error);
}
