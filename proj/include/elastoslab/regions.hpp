#pragma once

// Open regions on the torus as unions of periodic rectangles, and their smoothed indicators.

#include <algorithm>
#include <cmath>
#include <vector>

#include "elastoslab/spectral.hpp"

namespace elastoslab {

/// [x1_lo, x1_hi] x [x2_lo, x2_hi], read modulo 2 pi.
struct Rect {
  double x1_lo = 0.0, x1_hi = kTwoPi, x2_lo = 0.0, x2_hi = kTwoPi;
};

namespace detail {
inline bool in_periodic_interval(double t, double lo, double hi) {
  if (hi - lo >= kTwoPi) return true;
  if (hi <= lo) return false;
  const double d = std::fmod(std::fmod(t - lo, kTwoPi) + kTwoPi, kTwoPi);
  return d < hi - lo;
}
}  // namespace detail

struct Region {
  std::vector<Rect> rects;

  static Region whole() { return {{Rect{}}}; }

  bool contains(double x1, double x2) const {
    for (const auto& r : rects)
      if (detail::in_periodic_interval(x1, r.x1_lo, r.x1_hi) && detail::in_periodic_interval(x2, r.x2_lo, r.x2_hi))
        return true;
    return false;
  }

  /// Each rectangle moved inward by d on every finite side.
  Region shrunk(double d) const {
    Region out;
    for (auto r : rects) {
      if (r.x1_hi - r.x1_lo < kTwoPi) r.x1_lo += d, r.x1_hi -= d;
      if (r.x2_hi - r.x2_lo < kTwoPi) r.x2_lo += d, r.x2_hi -= d;
      if (r.x1_hi > r.x1_lo && r.x2_hi > r.x2_lo) out.rects.push_back(r);
    }
    return out;
  }
};

/// Smoothing length of the region indicators: four horizontal cells.
inline double region_scale(int n1, int n2) { return 4.0 * kTwoPi / std::min(n1, n2); }

inline InterfaceField raw_indicator(const Region& r, int n1, int n2) {
  return InterfaceField::sample(n1, n2, [&](double x1, double x2) { return r.contains(x1, x2) ? 1.0 : 0.0; });
}

/// Gaussian-mollified indicator with kernel exp(-|x|^2 / scale^2).
inline InterfaceField smoothed_indicator(const Region& r, int n1, int n2) {
  const double l = region_scale(n1, n2);
  return mollify(raw_indicator(r, n1, n2), l * l);
}

/// Grid restriction used for region minima: smoothed indicator > 1/2.
inline InterfaceField region_mask(const Region& r, int n1, int n2) {
  return smoothed_indicator(r, n1, n2).map([](double v) { return v > 0.5 ? 1.0 : 0.0; });
}

/// Cutoff for the weight: ~1 off Gamma^1 and ~0 deep inside it, clamped to [0, 1].
inline InterfaceField taylor_cutoff(const Region& gamma1, int n1, int n2) {
  const double l = region_scale(n1, n2);
  const auto inner = mollify(raw_indicator(gamma1.shrunk(2.0 * l), n1, n2), l * l);
  return inner.map([](double v) { return std::clamp(1.0 - v, 0.0, 1.0); });
}

}  // namespace elastoslab
