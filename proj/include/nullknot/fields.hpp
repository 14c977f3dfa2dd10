#pragma once

#include "nullknot/core.hpp"

// Bundled closed-form test fields.  The knotted family lives in bateman.hpp.

namespace nullknot {

/// Circularly polarized plane wave F = (1, i, 0) exp(i(z - t)).  Null and
/// shear-free everywhere; V = z-hat, W = 1.
inline AnalyticField plane_wave() {
  return make_analytic_field("plane_wave", [](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)x;
    (void)y;
    const S phase = exp(Complex(0, 1) * (z - t));
    return Vec3<S>{phase, Complex(0, 1) * phase, S(Complex(0))};
  });
}

inline AnalyticField zero_field() {
  return make_analytic_field("zero", [](auto t, auto, auto, auto) {
    using S = decltype(t);
    return Vec3<S>{S(Complex(0)), S(Complex(0)), S(Complex(0))};
  });
}

/// Superposition of circular waves running along z and (with twice the
/// amplitude) along y.  A Maxwell solution with F.F = 4 exp(i(y+z-2t)) != 0
/// and a Poynting flow that genuinely violates the pressureless-Euler law;
/// the amplitudes must differ, or a hidden symmetry (V a function of z - y
/// alone with V_y = V_z) makes the flow accidentally stationary.
inline AnalyticField two_wave() {
  return make_analytic_field("two_wave", [](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)x;
    const S a = exp(Complex(0, 1) * (z - t));
    const S b = 2.0 * exp(Complex(0, 1) * (y - t));
    return Vec3<S>{a + b, Complex(0, 1) * a, Complex(0, -1) * b};
  });
}

}  // namespace nullknot
