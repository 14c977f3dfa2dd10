#pragma once

#include <utility>

#include "nullknot/core.hpp"

// Pointwise residual diagnostics for nullness and shear-freeness, in every
// formulation the theory provides:
//   - null invariants E.B, E.E - B.B, and F.F (Riemann-Silberstein),
//   - shear: F.curl(F), the symmetric component form (E^iE^j - B^iB^j) d_j V_i
//     and (E^iB^j + E^jB^i) d_j V_i, the conformal-foliation pair, and the
//     tetrad shear scalar sigma~.
// Their mutual consistency on null fields is itself a tested property.

namespace nullknot {

/// Floor used in relative residuals; field zeros are legitimate inputs.
constexpr double kResidualFloor = 1e-30;

struct NullResiduals {
  double dot_EB;            // E . B
  double energy_imbalance;  // E.E - B.B
  Complex rs_null;          // F . F = energy_imbalance + 2i dot_EB
};

inline NullResiduals null_residuals(const Vec3C& F) {
  const Vec3R E = real(F), B = imag(F);
  return {dot(E, B), dot(E, E) - dot(B, B), dot(F, F)};
}

/// |F.F| / max(|F|^2, floor)
inline double relative_null_residual(const Vec3C& F) {
  const double f2 = std::norm(F.x) + std::norm(F.y) + std::norm(F.z);
  return std::abs(dot(F, F)) / std::max(f2, kResidualFloor);
}

/// |F.curl F| / (|F| |curl F| + floor)
inline double relative_shear_residual(const Vec3C& F, const Jac3C& J) {
  const Vec3C c = curl_from_jacobian(J);
  return std::abs(dot(F, c)) / (norm(F) * norm(c) + kResidualFloor);
}

struct ShearResiduals {
  Complex rs_shear;                     // F . curl F
  std::pair<double, double> comp_sym;   // (E^iE^j - B^iB^j) d_jV_i, (E^iB^j + E^jB^i) d_jV_i
  std::pair<double, double> foliation;  // V.[(E.grad)E - (B.grad)B], V.[(E.grad)B + (B.grad)E]
  Complex tetrad_sigma;                 // sigma~, see tetrad_shear
};

namespace detail {

inline Vec3R directional(const Vec3R& a, const Mat3R& J) {
  // (a . grad) X  with J[i][j] = d_j X_i
  Vec3R r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i] += a[j] * J[i][j];
  return r;
}

}  // namespace detail

/// Tetrad shear scalar of the ray congruence k = (1, V)/sqrt(2), from the
/// null frame m = (0, (E + iB)/(rho sqrt(2))).  Since m has no time
/// component, the contraction m^u m^v d_v k_u reduces to spatial indices:
///
///   sigma~ := F_i F_j d_j V_i / (2 sqrt(2) W^2)
///
/// Convention: flat metric, spatial-only contraction, overall sign chosen so
/// the plane wave gives exactly zero and the prefactor matches
/// m^i m^j d_j (V_i / sqrt(2)) with rho = W.
inline Complex tetrad_shear(const Vec3C& F, const Jac3C& /*J*/, const Vec3R& V, const Mat3R& JV,
                            double null_tolerance = 1e-6, double w_floor = 1e-12) {
  const double W = 0.5 * (std::norm(F.x) + std::norm(F.y) + std::norm(F.z));
  if (W < w_floor) throw DegenerateFlowError("tetrad_shear: W below threshold");
  if (relative_null_residual(F) > null_tolerance)
    throw NotNullError("tetrad_shear requires a null field value");
  (void)V;
  Complex s{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += F[i] * F[j] * JV[i][j];
  return s / (2.0 * std::sqrt(2.0) * W * W);
}

/// All four shear formulations from one consistent evaluation point.
/// V and JV come from flow_state (V = E x B / W).
inline ShearResiduals shear_residuals(const Vec3C& F, const Jac3C& J, const Vec3R& V,
                                      const Mat3R& JV, double w_floor = 1e-12) {
  const double W = 0.5 * (std::norm(F.x) + std::norm(F.y) + std::norm(F.z));
  if (W < w_floor) throw DegenerateFlowError("shear_residuals: W below threshold");

  ShearResiduals r;
  r.rs_shear = dot(F, curl_from_jacobian(J));

  const Vec3R E = real(F), B = imag(F);
  double sym_ee_bb = 0, sym_eb = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      sym_ee_bb += (E[i] * E[j] - B[i] * B[j]) * JV[i][j];
      sym_eb += (E[i] * B[j] + E[j] * B[i]) * JV[i][j];
    }
  r.comp_sym = {sym_ee_bb, sym_eb};

  const Mat3R JE = real(J), JB = imag(J);
  r.foliation = {dot(V, detail::directional(E, JE) - detail::directional(B, JB)),
                 dot(V, detail::directional(E, JB) + detail::directional(B, JE))};

  Complex s{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += F[i] * F[j] * JV[i][j];
  r.tetrad_sigma = s / (2.0 * std::sqrt(2.0) * W * W);
  return r;
}

}  // namespace nullknot
