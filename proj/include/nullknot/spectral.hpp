#pragma once

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include "nullknot/core.hpp"
#include "nullknot/parallel.hpp"

// Exact pseudo-spectral free-space Maxwell propagation on the periodic box,
// divergence projection, Coulomb-gauge vector potentials, and helicity
// integrals.
//
// Conventions:
//   - forward FFT unnormalized, inverse carries 1/N^3;
//   - wavevector of index j is k = pi * s(j) / L with the signed index
//     s(j) = j for j <= N/2 and j - N otherwise;
//   - the evolution F_t + i curl F = 0 becomes, per mode, dF^/dt = k x F^:
//     a rigid rotation of F^ about k^ with angle |k| dt, exact for any dt.

namespace nullknot {

struct SpectrumField {
  GridSpec spec;
  std::vector<Vec3C> c;  // same (x,y,z)-index layout as GridField, z fastest
};

struct HelicityReport {
  double H_m{};              // integral A . B
  double H_e{};              // integral C . E  (curl C = E)
  double H_Omega{};          // integral V . Omega over the unmasked region
  double masked_fraction{};  // fraction of cells with W/W_max < 1e-6
  std::string note{"periodic-box truncation; Coulomb gauge (div A = 0)"};
};

namespace detail {

// FFTW plan creation is not thread-safe; execution of a created plan is.
inline std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

inline void fft3_inplace(std::vector<Vec3C>& data, int n, int sign) {
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  const int dims[3] = {n, n, n};
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    plan = fftw_plan_many_dft(3, dims, 3, raw, nullptr, 3, 1, raw, nullptr, 3, 1, sign,
                              FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
}

inline int signed_index(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace detail

inline SpectrumField to_spectrum(const GridField& gf) {
  SpectrumField sf{gf.spec, gf.f};
  detail::fft3_inplace(sf.c, gf.spec.N, FFTW_FORWARD);
  return sf;
}

inline GridField to_grid(const SpectrumField& sf) {
  GridField gf{sf.spec, sf.c};
  detail::fft3_inplace(gf.f, sf.spec.N, FFTW_BACKWARD);
  const double scale = 1.0 / (double(sf.spec.N) * sf.spec.N * sf.spec.N);
  parallel_for(int(gf.f.size()), [&](int i) { gf.f[i] = gf.f[i] * scale; });
  return gf;
}

/// Visit every mode with its wavevector.  fn(k, chat) may mutate chat.
template <class Fn>
void for_each_mode(SpectrumField& sf, Fn fn) {
  const int n = sf.spec.N;
  const double k0 = M_PI / sf.spec.L;
  parallel_for(n, [&](int ix) {
    const double kx = k0 * detail::signed_index(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * detail::signed_index(iy, n);
      for (int iz = 0; iz < n; ++iz) {
        const double kz = k0 * detail::signed_index(iz, n);
        fn(Vec3R{kx, ky, kz}, sf.c[(std::size_t(ix) * n + iy) * n + iz]);
      }
    }
  });
}

/// max_k |k . F^| / max_k (|k| |F^|): a single scale-free divergence figure
/// for the whole spectrum (per-mode ratios would amplify round-off noise in
/// negligible modes).
inline double spectral_divergence_rel(SpectrumField& sf) {
  const int n = sf.spec.N;
  std::vector<double> num(n, 0.0), den(n, 0.0);
  const double k0 = M_PI / sf.spec.L;
  parallel_for(n, [&](int ix) {
    const double kx = k0 * detail::signed_index(ix, n);
    for (int iy = 0; iy < n; ++iy) {
      const double ky = k0 * detail::signed_index(iy, n);
      for (int iz = 0; iz < n; ++iz) {
        const double kz = k0 * detail::signed_index(iz, n);
        const Vec3C& v = sf.c[(std::size_t(ix) * n + iy) * n + iz];
        const double kn = std::sqrt(kx * kx + ky * ky + kz * kz);
        const Complex kdot = kx * v.x + ky * v.y + kz * v.z;
        num[ix] = std::max(num[ix], std::abs(kdot));
        den[ix] = std::max(den[ix], kn * norm(v));
      }
    }
  });
  double worst_num = 0, worst_den = 0;
  for (int i = 0; i < n; ++i) {
    worst_num = std::max(worst_num, num[i]);
    worst_den = std::max(worst_den, den[i]);
  }
  return worst_num / std::max(worst_den, 1e-300);
}

inline double grid_divergence_rel(const GridField& gf) {
  SpectrumField sf = to_spectrum(gf);
  return spectral_divergence_rel(sf);
}

/// Per-mode transverse projection F^ -> F^ - k^ (k^ . F^); idempotent.
inline GridField project_divergence_free(const GridField& gf) {
  SpectrumField sf = to_spectrum(gf);
  for_each_mode(sf, [](const Vec3R& k, Vec3C& v) {
    const double k2 = dot(k, k);
    if (k2 == 0.0) return;
    const Complex kdot = k.x * v.x + k.y * v.y + k.z * v.z;
    v = v - (kdot / k2) * complexify(k);
  });
  return to_grid(sf);
}

/// Advance F by the exact per-mode solution of dF^/dt = k x F^: rotate each
/// mode about k^ by the angle |k| dt (Rodrigues formula).  k = 0 unchanged.
/// Exact for arbitrary dt; no CFL restriction.
inline GridField propagate(const GridField& gf, double dt,
                           double divergence_tolerance = 1e-6) {
  SpectrumField sf = to_spectrum(gf);
  const double div = spectral_divergence_rel(sf);
  if (div > divergence_tolerance)
    throw NotDivergenceFreeError("propagate: spectral divergence " + std::to_string(div));
  for_each_mode(sf, [dt](const Vec3R& k, Vec3C& v) {
    const double kn = norm(k);
    if (kn == 0.0) return;
    const Vec3R u = k / kn;
    const double theta = kn * dt;
    const double c = std::cos(theta), s = std::sin(theta);
    const Complex udot = u.x * v.x + u.y * v.y + u.z * v.z;
    const Vec3C uxv = cross(complexify(u), v);
    v = c * v + s * uxv + ((1.0 - c) * udot) * complexify(u);
  });
  GridField out = to_grid(sf);
  out.spec.t = gf.spec.t + dt;
  return out;
}

/// Sum over modes of |F^|^2; propagate preserves this exactly per mode.
inline double spectral_energy(const GridField& gf) {
  SpectrumField sf = to_spectrum(gf);
  double total = 0;  // serial accumulation keeps the result deterministic
  for (const Vec3C& v : sf.c) total += norm(v) * norm(v);
  return total;
}

/// Coulomb-gauge potential of a divergence-free, zero-mean field X:
///   A^ = i k x X^ / |k|^2  (k != 0),  A^(0) = 0,  so that curl A = X.
/// A mean (k = 0) component cannot be written as a curl on the torus, so it
/// is subtracted before inverting: curl A reproduces X minus its box mean.
/// Fields dominated by their mean (|c_0| above `mean_fraction_limit` of the
/// peak mode) are rejected instead of silently gutted.  Localized fields on a
/// truncated box routinely carry a genuine nonzero mean (e.g. the net flux
/// integral of a hopfion), which this convention handles.
inline GridField vector_potential(const GridField& gf,
                                  double divergence_tolerance = 1e-6,
                                  double mean_fraction_limit = 0.5) {
  SpectrumField sf = to_spectrum(gf);
  const double div = spectral_divergence_rel(sf);
  if (div > divergence_tolerance)
    throw NotDivergenceFreeError("vector_potential: spectral divergence " +
                                 std::to_string(div));
  double peak = 0;
  for (const Vec3C& v : sf.c) peak = std::max(peak, norm(v));
  if (peak > 0 && norm(sf.c[0]) > mean_fraction_limit * peak)
    throw NonzeroMeanError("vector_potential: field is dominated by its mean");
  sf.c[0] = Vec3C{};
  for_each_mode(sf, [](const Vec3R& k, Vec3C& v) {
    const double k2 = dot(k, k);
    if (k2 == 0.0) return;
    v = (Complex(0, 1) / k2) * cross(complexify(k), v);
  });
  return to_grid(sf);
}

/// curl on the grid, computed spectrally: (curl X)^ = i k x X^.
inline GridField spectral_curl(const GridField& gf) {
  SpectrumField sf = to_spectrum(gf);
  for_each_mode(sf, [](const Vec3R& k, Vec3C& v) {
    v = Complex(0, 1) * cross(complexify(k), v);
  });
  return to_grid(sf);
}

namespace detail {

inline GridField real_grid(const GridField& gf, bool imaginary) {
  GridField out{gf.spec, std::vector<Vec3C>(gf.f.size())};
  for (std::size_t i = 0; i < gf.f.size(); ++i)
    out.f[i] = complexify(imaginary ? imag(gf.f[i]) : real(gf.f[i]));
  return out;
}

}  // namespace detail

/// Split F = E + iB into real grids.
inline GridField electric_grid(const GridField& gf) { return detail::real_grid(gf, false); }
inline GridField magnetic_grid(const GridField& gf) { return detail::real_grid(gf, true); }

/// H_m = sum A.B dV,  H_e = sum C.E dV (curl C = E),  H_Omega = sum V.Omega dV
/// with cells W/W_max < 1e-6 excluded from H_Omega (fraction reported).
inline HelicityReport helicities(const GridField& gfE, const GridField& gfB,
                                 double w_mask_rel = 1e-6) {
  if (gfE.spec.N != gfB.spec.N || gfE.spec.L != gfB.spec.L)
    throw ConfigError("helicities: E and B grids must share a GridSpec");
  const GridField A = vector_potential(gfB);
  const GridField C = vector_potential(gfE);

  const std::size_t total = gfE.f.size();
  const double dv = std::pow(2.0 * gfE.spec.L / gfE.spec.N, 3);

  HelicityReport rep;
  double w_max = 0;
  std::vector<double> W(total), hm(total), he(total);
  for (std::size_t i = 0; i < total; ++i) {
    const Vec3R E = real(gfE.f[i]), B = real(gfB.f[i]);
    W[i] = 0.5 * (dot(E, E) + dot(B, B));
    w_max = std::max(w_max, W[i]);
    hm[i] = dot(real(A.f[i]), B);
    he[i] = dot(real(C.f[i]), E);
  }

  // V on the grid (masked where W is negligible), Omega = curl V spectrally.
  GridField Vgrid{gfE.spec, std::vector<Vec3C>(total)};
  std::size_t masked = 0;
  for (std::size_t i = 0; i < total; ++i) {
    if (w_max == 0.0 || W[i] < w_mask_rel * w_max) {
      ++masked;
      Vgrid.f[i] = Vec3C{};
    } else {
      const Vec3R E = real(gfE.f[i]), B = real(gfB.f[i]);
      Vgrid.f[i] = complexify(cross(E, B) / W[i]);
    }
  }
  const GridField Omega = spectral_curl(Vgrid);

  for (std::size_t i = 0; i < total; ++i) {
    rep.H_m += hm[i] * dv;
    rep.H_e += he[i] * dv;
    if (W[i] >= w_mask_rel * w_max)
      rep.H_Omega += dot(real(Vgrid.f[i]), real(Omega.f[i])) * dv;
  }
  rep.masked_fraction = double(masked) / double(total);
  return rep;
}

}  // namespace nullknot
