#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "elastoslab/spectral.hpp"

using namespace elastoslab;

namespace {

InterfaceField random_band(int n, int band, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<std::array<double, 4>> modes;
  for (int k1 = -band; k1 <= band; ++k1)
    for (int k2 = 0; k2 <= band; ++k2) modes.push_back({double(k1), double(k2), d(rng), d(rng)});
  return InterfaceField::sample(n, n, [&](double x1, double x2) {
    double v = 0.0;
    for (auto& m : modes) v += m[2] * std::cos(m[0] * x1 + m[1] * x2) + m[3] * std::sin(m[0] * x1 + m[1] * x2);
    return v;
  });
}

double max_diff(const InterfaceField& a, const InterfaceField& b) { return (a - b).max_abs(); }

}  // namespace

TEST(Spectral, DerivativeOfCosine) {
  auto g = InterfaceField::sample(32, 32, [](double x1, double) { return std::cos(x1); });
  auto want = InterfaceField::sample(32, 32, [](double x1, double) { return -std::sin(x1); });
  EXPECT_LT(max_diff(horizontal_derivative(g, 1), want), 1e-13);
}

TEST(Spectral, DerivativeOfConstantVanishes) {
  EXPECT_LT(horizontal_derivative(InterfaceField::constant(16, 16, 3.5), 1).max_abs(), 1e-14);
  EXPECT_LT(horizontal_derivative(InterfaceField::constant(16, 16, 3.5), 2).max_abs(), 1e-14);
}

TEST(Spectral, DerivativeMixedMode) {
  auto g = InterfaceField::sample(32, 32, [](double x1, double x2) { return std::cos(2 * x1 + x2); });
  auto want = InterfaceField::sample(32, 32, [](double x1, double x2) { return -std::sin(2 * x1 + x2); });
  EXPECT_LT(max_diff(horizontal_derivative(g, 2), want), 1e-13);
}

TEST(Spectral, BesselMultiplierExamples) {
  std::mt19937_64 rng(7);
  auto g = random_band(32, 5, rng);
  EXPECT_LT(max_diff(bessel_multiplier(g, 0.0), g), 1e-12);
  auto c = InterfaceField::constant(16, 16, 2.25);
  EXPECT_LT(max_diff(bessel_multiplier(c, 3.7), c), 1e-13);
  auto cosx = InterfaceField::sample(32, 32, [](double x1, double) { return std::cos(x1); });
  // Direct DFT of cos(x1): only (+-1, 0) coefficients, each 1/2, scaled by (1+1)^{2/2}.
  double direct = 0.0;
  for (int i1 = 0; i1 < 32; ++i1) direct += cosx.value(i1, 0) * std::cos(kTwoPi * i1 / 32) / 32.0;
  EXPECT_NEAR(direct, 0.5, 1e-14);
  EXPECT_LT(max_diff(bessel_multiplier(cosx, 2.0), 2.0 * cosx), 1e-13);
}

TEST(Spectral, MollifyExamples) {
  auto g = InterfaceField::sample(32, 32, [](double x1, double) { return std::cos(8 * x1); });
  EXPECT_LT(max_diff(mollify(g, 0.1), std::exp(-1.6) * g), 1e-13);
  auto c = InterfaceField::constant(16, 16, -1.5);
  for (double eps : {1e-1, 1e-2, 1e-3}) EXPECT_LT(max_diff(mollify(c, eps), c), 1e-13);
  std::mt19937_64 rng(11);
  auto r = random_band(32, 10, rng);
  double prev = 1e300;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const double d = l2_norm(mollify(r, eps) - r) / l2_norm(r);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 0.05);
  EXPECT_THROW(mollify(r, 0.0), Error);
}

TEST(Spectral, MollifyPreservesMeanAndSmooths) {
  std::mt19937_64 rng(3);
  auto r = random_band(32, 15, rng);
  EXPECT_EQ(mollify(r, 0.05).coeffs()[0], r.coeffs()[0]);
  // sqrt(eps)|J_eps g|_{H^{s+1/2}} <= C |g|_{H^s}; sup over k of sqrt(eps) (1+k^2)^{1/4} e^{-eps k^2/4} is < 1.
  for (double eps : {1e-1, 1e-2, 1e-3})
    for (int t = 0; t < 5; ++t) {
      auto g = random_band(32, 15, rng);
      EXPECT_LE(std::sqrt(eps) * sobolev_norm(mollify(g, eps), 2.5), 1.0 * sobolev_norm(g, 2.0) + 1e-12);
    }
}

TEST(Spectral, SobolevNormExamples) {
  EXPECT_EQ(sobolev_norm(InterfaceField(16, 16), 3.0), 0.0);
  auto cosx = InterfaceField::sample(32, 32, [](double x1, double) { return std::cos(x1); });
  EXPECT_NEAR(sobolev_norm(cosx, 0.0), std::numbers::pi * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(sobolev_norm(cosx, 1.0), std::sqrt(2.0) * sobolev_norm(cosx, 0.0), 1e-12);
  std::mt19937_64 rng(5);
  for (int n : {16, 17, 32}) {
    std::normal_distribution<double> d;
    std::vector<double> v(n * n);
    for (auto& x : v) x = d(rng);
    auto g = InterfaceField::from_values(n, n, v);
    EXPECT_NEAR(sobolev_norm(g, 0.0) / l2_norm(g), 1.0, 1e-12);
  }
}

TEST(Spectral, DealiasedProduct) {
  std::mt19937_64 rng(9);
  auto b = random_band(24, 7, rng);
  EXPECT_LT(max_diff(dealiased_product(InterfaceField::constant(24, 24, 1.0), b), b), 1e-12);
  auto cosx = InterfaceField::sample(16, 16, [](double x1, double) { return std::cos(x1); });
  auto want = InterfaceField::sample(16, 16, [](double x1, double) { return 0.5 + 0.5 * std::cos(2 * x1); });
  EXPECT_LT(max_diff(dealiased_product(cosx, cosx), want), 1e-13);
  // Coefficient convolution oracle for fields band-limited to |k_i| <= N/3.
  const int n = 24;
  auto a = random_band(n, n / 3, rng);
  auto c = random_band(n, n / 3, rng);
  auto p = dealiased_product(a, c);
  double worst = 0.0, scale = 0.0;
  const int lim = n / 2 - 1;
  for (int k1 = -lim; k1 <= lim; ++k1)
    for (int k2 = -lim; k2 <= lim; ++k2) {
      cplx s{};
      for (int m1 = -n / 3; m1 <= n / 3; ++m1)
        for (int m2 = -n / 3; m2 <= n / 3; ++m2) {
          const int r1 = k1 - m1, r2 = k2 - m2;
          if (std::abs(r1) > n / 3 || std::abs(r2) > n / 3) continue;
          s += a.coeff(m1, m2) * c.coeff(r1, r2);
        }
      worst = std::max(worst, std::abs(s - p.coeff(k1, k2)));
      scale = std::max(scale, std::abs(s));
    }
  EXPECT_LT(worst, 1e-12 * scale);
  EXPECT_THROW(dealiased_product(a, cosx), Error);
}

TEST(Spectral, Properties) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> d;
  std::vector<double> v(32 * 32);
  for (auto& x : v) x = d(rng);
  auto g = InterfaceField::from_values(32, 32, v);
  auto back = InterfaceField::from_coeffs(32, 32, g.coeffs());
  double m = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) m = std::max(m, std::abs(back[j] - v[j]));
  EXPECT_LT(m, 1e-12 * g.max_abs());
  // Band-limited so the Nyquist row does not enter the derivative comparison.
  auto r = random_band(32, 12, rng);
  EXPECT_LT(max_diff(bessel_multiplier(bessel_multiplier(r, 3.0), -3.0), r), 1e-10 * r.max_abs());
  auto lhs = horizontal_derivative(bessel_multiplier(r, 1.5), 1);
  auto rhs = bessel_multiplier(horizontal_derivative(r, 1), 1.5);
  double cmax = 0.0;
  for (std::size_t j = 0; j < lhs.coeffs().size(); ++j) cmax = std::max(cmax, std::abs(lhs.coeffs()[j] - rhs.coeffs()[j]));
  EXPECT_LT(cmax, 1e-12 * r.max_abs());
}

TEST(Spectral, ResampleInterpolatesBandLimitedFields) {
  auto fn = [](double x1, double x2) { return std::cos(3 * x1 - 2 * x2) + 0.5 * std::sin(x2) - 0.25; };
  const auto g = InterfaceField::sample(16, 12, fn);
  const auto fine = resample(g, 24, 20);
  EXPECT_LT((fine - InterfaceField::sample(24, 20, fn)).max_abs(), 1e-13);
  EXPECT_LT((resample(fine, 16, 12) - g).max_abs(), 1e-13);
  // The Nyquist mode of the coarse grid has no unique interpolant and is dropped.
  const auto nyq = InterfaceField::sample(8, 8, [](double x1, double) { return std::cos(4 * x1); });
  EXPECT_LT(resample(nyq, 16, 16).max_abs(), 1e-13);
}
