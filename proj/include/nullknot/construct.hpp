#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nullknot/core.hpp"
#include "nullknot/diagnostics.hpp"

// Two construction routes for initially-null fields:
//   (a) rational-map route: B = f(chi,eta) grad(chi) x grad(eta) from a
//       rational map psi = u/v, V = (g grad(chi) + h grad(eta)) normalized,
//       E = B x V — structurally null, with the divergence-free / shear-free
//       requirements evaluated as residuals (not solved);
//   (b) Nurowski route: conjugate pairs (f, g) with |grad f| = |grad g| and
//       grad f . grad g = 0 from a holomorphic seed, and fields
//       F = p (grad f + i grad g).

namespace nullknot {

// ---- trivariate polynomials and rational maps ------------------------------

struct Poly3 {
  struct Term {
    Complex c;
    int px{}, py{}, pz{};
  };
  std::vector<Term> terms;

  template <class S>
  S eval(const S& x, const S& y, const S& z) const {
    S acc{};
    for (const Term& t : terms) acc += t.c * ipow(x, t.px) * ipow(y, t.py) * ipow(z, t.pz);
    return acc;
  }
};

/// psi = u / v with polynomial numerator and denominator; the combined forms
/// below never divide by v, so zeros of v are not poles of the
/// constructed B.  The only genuine degeneracy is |u|^2 + |v|^2 = 0.
struct RationalMap {
  std::string name;
  Poly3 u, v;
};

/// The Hopf fibration map psi = 2(x+iy) / (2z + i(r^2 - 1)):
/// |u|^2 + |v|^2 = (r^2 + 1)^2 > 0 everywhere.
inline RationalMap hopf_map() {
  RationalMap m;
  m.name = "hopf";
  m.u.terms = {{Complex(2, 0), 1, 0, 0}, {Complex(0, 2), 0, 1, 0}};
  m.v.terms = {{Complex(2, 0), 0, 0, 1},
               {Complex(0, 1), 2, 0, 0},
               {Complex(0, 1), 0, 2, 0},
               {Complex(0, 1), 0, 0, 2},
               {Complex(0, -1), 0, 0, 0}};
  return m;
}

// ---- profile functions f, g, h of (chi, eta) -------------------------------

/// Sum of terms  c * chi^p * cos(b eta)  or  c * chi^p * sin(b eta).
/// Evaluated through cos/sin of multiples of eta assembled from
/// e^{i eta} = u conj(v) / |u conj(v)|, which keeps every quantity in the
/// branch-free algebra the dual-number derivatives flow through.
struct TrigPoly {
  struct Term {
    double c{};
    int chi_pow{};
    int eta_mult{};
    bool sine{};
  };
  std::vector<Term> terms;

  bool needs_eta() const {
    for (const Term& t : terms)
      if (t.eta_mult != 0 || t.sine) return true;
    return false;
  }

  static TrigPoly constant(double c) { return {{{c, 0, 0, false}}}; }

  /// chi and e^{i eta} supplied as elements of the (possibly dual) complex
  /// scalar algebra S.
  template <class S>
  S eval(const S& chi, const S& eip) const {
    const Complex i(0, 1);
    S acc{};
    for (const Term& t : terms) {
      const S phase = ipow(eip, t.eta_mult);
      const S trig = t.sine ? (phase - conj(phase)) / Complex(0, 2) : (phase + conj(phase)) * 0.5;
      acc += t.c * ipow(chi, t.chi_pow) * trig;
    }
    return acc;
  }
};

struct ProfileFunctions {
  TrigPoly f = TrigPoly::constant(1.0);  // B = f grad(chi) x grad(eta)
  TrigPoly g = TrigPoly::constant(1.0);  // V direction: g grad(chi) + h grad(eta)
  TrigPoly h = TrigPoly::constant(0.0);
};

// ---- rational-map construction ---------------------------------------------

namespace detail {

/// Everything the rational-map route needs at one point, in the scalar
/// algebra S (gradients from an inner dual layer, so they stay exact when S
/// itself is a dual).
template <class S>
struct MapVals {
  S u, v, D;            // D = |u|^2 + |v|^2
  Vec3<S> gu, gv;       // gradients of u, v
  Vec3<S> G;            // v grad(u) - u grad(v)
  Vec3<S> grad_chi;
  S chi;
};

template <class S>
S re_alg(const S& a) {
  return (a + conj(a)) * 0.5;
}
template <class S>
S im_alg(const S& a) {
  return (a - conj(a)) / Complex(0, 2);
}
template <class S>
Vec3<S> re_alg(const Vec3<S>& a) {
  return {re_alg(a.x), re_alg(a.y), re_alg(a.z)};
}
template <class S>
Vec3<S> im_alg(const Vec3<S>& a) {
  return {im_alg(a.x), im_alg(a.y), im_alg(a.z)};
}

template <class S>
MapVals<S> map_vals(const RationalMap& map, const S& x, const S& y, const S& z) {
  using D3 = Dual<S, 3>;
  const D3 xd = D3::seeded(x, 0), yd = D3::seeded(y, 1), zd = D3::seeded(z, 2);
  const D3 ud = map.u.eval(xd, yd, zd);
  const D3 vd = map.v.eval(xd, yd, zd);

  MapVals<S> m;
  m.u = ud.v;
  m.v = vd.v;
  m.gu = {ud.d[0], ud.d[1], ud.d[2]};
  m.gv = {vd.d[0], vd.d[1], vd.d[2]};
  m.D = re_alg(m.u * conj(m.u) + m.v * conj(m.v));
  guard_denominator(m.D, "|u|^2 + |v|^2");
  m.G = m.gu * m.v - m.gv * m.u;
  m.chi = re_alg(m.u * conj(m.u)) / m.D;

  // grad(chi) = [2 Re(conj(u) grad u) D - |u|^2 grad D] / D^2
  const Vec3<S> gUU = 2.0 * re_alg(Vec3<S>{conj(m.u) * m.gu.x, conj(m.u) * m.gu.y, conj(m.u) * m.gu.z});
  const Vec3<S> gVV = 2.0 * re_alg(Vec3<S>{conj(m.v) * m.gv.x, conj(m.v) * m.gv.y, conj(m.v) * m.gv.z});
  const Vec3<S> gD = gUU + gVV;
  const S uu = re_alg(m.u * conj(m.u));
  m.grad_chi = (gUU * m.D - gD * uu) / (m.D * m.D);
  return m;
}

/// grad(eta) = Im(grad(psi)/psi) = Im(G conj(uv)) / |uv|^2; poles at zeros of
/// u or v are genuine (eta is the phase of psi).
template <class S>
Vec3<S> grad_eta(const MapVals<S>& m) {
  const S uv = m.u * m.v;
  const S uv2 = re_alg(uv * conj(uv));
  if (std::abs(value_of(uv2)) < 1e-24)
    throw ZeroPsiError("grad(eta) at a zero or pole of psi");
  return im_alg(Vec3<S>{m.G.x * conj(uv), m.G.y * conj(uv), m.G.z * conj(uv)}) / uv2;
}

/// e^{i eta} = u conj(v) / |u conj(v)|.
template <class S>
S exp_i_eta(const MapVals<S>& m) {
  const S w = m.u * conj(m.v);
  const S mod2 = re_alg(w * conj(w));
  if (std::abs(value_of(mod2)) < 1e-24)
    throw ZeroPsiError("eta at a zero or pole of psi");
  return w / sqrt(mod2);
}

/// B = f(chi,eta) grad(chi) x grad(eta) in the branch-free combined form
/// grad(chi) x grad(eta) = 2 cross(Re G, Im G) / D^2.
template <class S>
Vec3<S> b_vals(const MapVals<S>& m, const ProfileFunctions& profiles) {
  const Vec3<S> core = 2.0 * cross(re_alg(m.G), im_alg(m.G)) / (m.D * m.D);
  if (!profiles.f.needs_eta() && profiles.f.terms.size() == 1 &&
      profiles.f.terms[0].chi_pow == 0)
    return core * profiles.f.terms[0].c;
  const S fval = profiles.f.eval(m.chi, profiles.f.needs_eta() ? exp_i_eta(m) : S(Complex(1)));
  return core * fval;
}

template <class S>
Vec3<S> v_vals(const MapVals<S>& m, const ProfileFunctions& profiles, double threshold) {
  const S one(Complex(1));
  const S eip = (profiles.g.needs_eta() || profiles.h.needs_eta()) ? exp_i_eta(m) : one;
  const S gval = profiles.g.eval(m.chi, eip);
  const S hval = profiles.h.eval(m.chi, eip);
  Vec3<S> N = m.grad_chi * gval;
  const bool h_zero = profiles.h.terms.empty() ||
                      (profiles.h.terms.size() == 1 && profiles.h.terms[0].c == 0.0);
  if (!h_zero) N = N + grad_eta(m) * hval;
  // N has real-valued content, so N . conj(N) is its squared length
  const S n2 = re_alg(N.x * conj(N.x) + N.y * conj(N.y) + N.z * conj(N.z));
  if (std::abs(value_of(n2)) < threshold * threshold)
    throw DegenerateDirectionError("g grad(chi) + h grad(eta) too small to normalize");
  return N / sqrt(n2);
}

}  // namespace detail

/// (chi, eta) at a point; eta in [0, 2pi).
inline std::pair<double, double> chi_eta(const RationalMap& map, const Vec3R& x) {
  const auto m = detail::map_vals(map, Complex(x.x), Complex(x.y), Complex(x.z));
  const double chi = m.chi.real();
  const Complex w = m.u * std::conj(m.v);
  if (std::abs(w) < 1e-12) throw ZeroPsiError("eta at a zero or pole of psi");
  double eta = std::arg(w);
  if (eta < 0) eta += 2.0 * M_PI;
  return {chi, eta};
}

constexpr double kDirectionThreshold = 1e-12;

/// B = f(chi,eta) grad(chi) x grad(eta).
inline Vec3R knotted_B(const RationalMap& map, const ProfileFunctions& profiles,
                       const Vec3R& x) {
  const auto m = detail::map_vals(map, Complex(x.x), Complex(x.y), Complex(x.z));
  return real(detail::b_vals(m, profiles));
}

/// Unit vector along g grad(chi) + h grad(eta).
inline Vec3R perpendicular_V(const RationalMap& map, const ProfileFunctions& profiles,
                             const Vec3R& x, double threshold = kDirectionThreshold) {
  const auto m = detail::map_vals(map, Complex(x.x), Complex(x.y), Complex(x.z));
  return real(detail::v_vals(m, profiles, threshold));
}

struct InitialTriple {
  Vec3R E, B, V;
  bool degenerate{};  // direction undefined (or B = 0): triple zeroed
};

/// E = B x V: structurally null (E.B = 0 and |E| = |B| by construction).
inline InitialTriple assemble_initial_data(const RationalMap& map,
                                           const ProfileFunctions& profiles, const Vec3R& x,
                                           double threshold = kDirectionThreshold) {
  try {
    const auto m = detail::map_vals(map, Complex(x.x), Complex(x.y), Complex(x.z));
    const Vec3R B = real(detail::b_vals(m, profiles));
    const Vec3R V = real(detail::v_vals(m, profiles, threshold));
    return {cross(B, V), B, V, false};
  } catch (const DegenerateDirectionError&) {
    return {{}, {}, {}, true};
  } catch (const ZeroPsiError&) {
    return {{}, {}, {}, true};
  }
}

/// The assembled complex field F = E + iB as an AnalyticField (time-frozen
/// initial data; the t argument is ignored).  Throws at degenerate points.
inline AnalyticField assembled_field(const RationalMap& map, const ProfileFunctions& profiles,
                                     double threshold = kDirectionThreshold) {
  auto fn = [map, profiles, threshold](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)t;
    const auto m = detail::map_vals(map, x, y, z);
    const Vec3<S> B = detail::b_vals(m, profiles);
    const Vec3<S> V = detail::v_vals(m, profiles, threshold);
    const Vec3<S> E = cross(B, V);
    return E + Complex(0, 1) * B;
  };
  return make_analytic_field("rational_map(" + map.name + ")", fn,
                             "degenerate where g grad(chi) + h grad(eta) ~ 0");
}

/// B alone as a (complexified real) AnalyticField, for divergence checks.
inline AnalyticField knotted_B_field(const RationalMap& map, const ProfileFunctions& profiles) {
  auto fn = [map, profiles](auto t, auto x, auto y, auto z) {
    (void)t;
    const auto m = detail::map_vals(map, x, y, z);
    return detail::b_vals(m, profiles);
  };
  return make_analytic_field("rational_map_B(" + map.name + ")", fn);
}

struct IcResiduals {
  double div_E{};  // scale-normalized div E
  double sf1{};    // E.curl E - B.curl B, scale-normalized
  double sf2{};    // B.curl E + E.curl B, scale-normalized
  bool degenerate{};
};

/// Residuals of the divergence-free and shear-free requirements.  Both
/// shear residuals are the real/imaginary parts of F.curl F for F = E + iB.
inline IcResiduals initial_condition_residuals(const RationalMap& map,
                                               const ProfileFunctions& profiles,
                                               const Vec3R& x,
                                               double threshold = kDirectionThreshold) {
  const AnalyticField field = assembled_field(map, profiles, threshold);
  FieldJet1 jet;
  try {
    jet = field.jet1({0.0, x.x, x.y, x.z});
  } catch (const DegenerateDirectionError&) {
    return {0, 0, 0, true};
  } catch (const ZeroPsiError&) {
    return {0, 0, 0, true};
  }
  if (norm(jet.F) < 1e-14) return {0, 0, 0, true};

  IcResiduals r;
  const Mat3R JE = real(jet.J);
  const double div_scale = 3.0 * max_abs(JE) + kResidualFloor;
  r.div_E = trace(JE) / div_scale;

  const Vec3C curl = curl_from_jacobian(jet.J);
  const Complex fc = dot(jet.F, curl);
  const double shear_scale = norm(jet.F) * norm(curl) + kResidualFloor;
  r.sf1 = fc.real() / shear_scale;
  r.sf2 = fc.imag() / shear_scale;
  return r;
}

/// Sample F = E + iB on a grid; degenerate points are zeroed and counted.
inline GridField assemble_grid(const RationalMap& map, const ProfileFunctions& profiles,
                               const GridSpec& spec, int* degenerate_count = nullptr,
                               double threshold = kDirectionThreshold) {
  GridField g = make_grid(spec);
  std::vector<int> degenerate_per_slab(spec.N, 0);
  parallel_for(spec.N, [&](int ix) {
    const double x = spec.coord(ix);
    for (int iy = 0; iy < spec.N; ++iy)
      for (int iz = 0; iz < spec.N; ++iz) {
        const InitialTriple triple = assemble_initial_data(
            map, profiles, {x, spec.coord(iy), spec.coord(iz)}, threshold);
        if (triple.degenerate) ++degenerate_per_slab[ix];
        g.at(ix, iy, iz) = complexify(triple.E, triple.B);
      }
  });
  if (degenerate_count) {
    *degenerate_count = 0;
    for (int c : degenerate_per_slab) *degenerate_count += c;
  }
  return g;
}

// ---- Nurowski conjugate pairs ----------------------------------------------

struct SeedJet {
  Complex F, d1, d2;       // F and its first partials
  Complex d11, d12, d22;   // second partials (d12 = d21 by holomorphy)
};

struct HolomorphicSeed {
  std::string name;
  std::function<SeedJet(Complex, Complex)> jet;
};

/// `fn` has signature  template<class S> S fn(S phi1, S phi2).
template <class Fn>
HolomorphicSeed make_holomorphic_seed(std::string name, Fn fn) {
  HolomorphicSeed s;
  s.name = std::move(name);
  s.jet = [fn](Complex p1, Complex p2) -> SeedJet {
    using D1 = Dual<Complex, 2>;
    using D2 = Dual<D1, 2>;
    auto seed2 = [](Complex c, int slot) {
      D2 s(D1::seeded(c, slot));
      s.d[slot] = D1(Complex(1));
      return s;
    };
    const D2 v = fn(seed2(p1, 0), seed2(p2, 1));
    SeedJet j;
    j.F = v.v.v;
    j.d1 = v.v.d[0];
    j.d2 = v.v.d[1];
    j.d11 = v.d[0].d[0];
    j.d12 = v.d[0].d[1];
    j.d22 = v.d[1].d[1];
    return j;
  };
  return s;
}

/// Newton solve of the algebraic system
///   (x+iy) phi1 + z phi2 = dF/dphi1,
///  -(x-iy) phi2 + z phi1 = dF/dphi2
/// to relative tolerance `tol` within `max_iters` iterations.
inline std::pair<Complex, Complex> nurowski_solve(const HolomorphicSeed& seed, const Vec3R& x,
                                                  std::pair<Complex, Complex> guess,
                                                  double tol = 1e-12, int max_iters = 50) {
  const Complex xp(x.x, x.y), xm(x.x, -x.y);
  Complex p1 = guess.first, p2 = guess.second;
  double res = 0;
  for (int it = 0; it < max_iters; ++it) {
    const SeedJet j = seed.jet(p1, p2);
    const Complex R1 = xp * p1 + x.z * p2 - j.d1;
    const Complex R2 = -xm * p2 + x.z * p1 - j.d2;
    const double scale = std::max(1.0, std::max(std::abs(p1), std::abs(p2)));
    res = std::max(std::abs(R1), std::abs(R2));
    if (res <= tol * scale) return {p1, p2};

    const Complex J11 = xp - j.d11, J12 = Complex(x.z) - j.d12;
    const Complex J21 = Complex(x.z) - j.d12, J22 = -xm - j.d22;
    const Complex det = J11 * J22 - J12 * J21;
    const double jscale = std::max({std::abs(J11), std::abs(J12), std::abs(J21),
                                    std::abs(J22), 1e-300});
    if (std::abs(det) < 1e-14 * jscale * jscale)
      throw SingularJacobianError("nurowski_solve: Jacobian singular at the iterate");
    p1 -= (R1 * J22 - R2 * J12) / det;
    p2 -= (R2 * J11 - R1 * J21) / det;
  }
  throw NoConvergenceError("nurowski_solve: no convergence, final residual " +
                           std::to_string(res));
}

/// A conjugate pair (f, g): real functions with |grad f| = |grad g| and
/// grad f . grad g = 0.  Packed as f + ig with the complex gradient
/// (grad f) + i (grad g).
struct ConjugatePair {
  std::string provenance;  // "closed-form" or "nurowski-numeric"
  std::function<Complex(const Vec3R&)> value;
  std::function<Vec3C(const Vec3R&)> gradient;
};

/// (| |grad f| - |grad g| |, |grad f . grad g|), both over |grad f| |grad g|.
inline std::pair<double, double> conjugacy_residuals(const ConjugatePair& pair,
                                                     const Vec3R& x) {
  const Vec3C g = pair.gradient(x);
  const Vec3R gf = real(g), gg = imag(g);
  const double nf = norm(gf), ng = norm(gg);
  const double scale = std::max(nf * ng, kResidualFloor);
  return {std::abs(nf - ng) * std::max(nf, ng) / scale, std::abs(dot(gf, gg)) / scale};
}

/// Closed-form conjugate pair of the (1,1) knotted family at t = 0:
/// f + ig = 4(x-iy)/(r^2-1+2iz).
inline ConjugatePair known_family_pair_t0() {
  ConjugatePair pair;
  pair.provenance = "closed-form";
  auto fg = [](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)t;
    const Complex i(0, 1);
    const S s = x * x + y * y + z * z - 1.0 + 2.0 * i * z;
    guard_denominator(s, "r^2 - 1 + 2iz");
    const S w = 4.0 * (x - i * y);
    return Vec3<S>{w / s, S(Complex(0)), S(Complex(0))};
  };
  const AnalyticField wrapped = make_analytic_field("family_fg", fg);
  pair.value = [wrapped](const Vec3R& x) { return wrapped.value({0, x.x, x.y, x.z}).x; };
  pair.gradient = [wrapped](const Vec3R& x) {
    const FieldJet1 j = wrapped.jet1({0, x.x, x.y, x.z});
    return Vec3C{j.J[0][0], j.J[0][1], j.J[0][2]};
  };
  return pair;
}

struct NurowskiOptions {
  double anchor_x = -8.0;       // quadrature anchor plane (C = 0 there)
  double tol = 1e-12;
  int max_iters = 50;
  int intervals_per_unit = 4;   // composite Gauss subdivisions along x
  double branch_threshold = 0.5;
  std::pair<Complex, Complex> guess{0.1, 0.1};
};

namespace detail {

/// Track the solution branch along the x-line to x_target by continuation,
/// optionally accumulating the quadrature of phi1^2 - phi2^2.
struct LineSolve {
  Complex phi1, phi2;
  Complex integral;
};

inline LineSolve solve_along_line(const HolomorphicSeed& seed, double y, double z,
                                  double x_target, const NurowskiOptions& opt) {
  // 5-point Gauss-Legendre nodes/weights on [-1, 1]
  static const double gx[5] = {-0.906179845938664, -0.538469310105683, 0.0,
                               0.538469310105683, 0.906179845938664};
  static const double gw[5] = {0.236926885056189, 0.478628670499366, 0.568888888888889,
                               0.478628670499366, 0.236926885056189};

  const double len = x_target - opt.anchor_x;
  const int nseg = std::max(2, int(std::ceil(std::abs(len) * opt.intervals_per_unit)));
  std::pair<Complex, Complex> prev = opt.guess;
  prev = nurowski_solve(seed, {opt.anchor_x, y, z}, prev, opt.tol, opt.max_iters);
  Complex integral = 0;
  for (int s = 0; s < nseg; ++s) {
    const double a = opt.anchor_x + len * s / nseg;
    const double b = opt.anchor_x + len * (s + 1) / nseg;
    for (int q = 0; q < 5; ++q) {
      const double xq = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
      const auto sol = nurowski_solve(seed, {xq, y, z}, prev, opt.tol, opt.max_iters);
      const double jump = std::max(std::abs(sol.first - prev.first),
                                   std::abs(sol.second - prev.second));
      const double ref = 1.0 + std::max(std::abs(prev.first), std::abs(prev.second));
      if (jump > opt.branch_threshold * ref)
        throw BranchJumpError("nurowski continuation jumped branches on line y=" +
                              std::to_string(y) + " z=" + std::to_string(z));
      prev = sol;
      const Complex p1 = sol.first, p2 = sol.second;
      integral += 0.5 * (b - a) * gw[q] * (p1 * p1 - p2 * p2);
    }
  }
  const auto final_sol =
      nurowski_solve(seed, {x_target, y, z}, prev, opt.tol, opt.max_iters);
  return {final_sol.first, final_sol.second, integral};
}

}  // namespace detail

/// Conjugate pair from a holomorphic seed.  Values by composite Gauss
/// quadrature of phi1^2 - phi2^2 along x from the anchor plane (C = 0 there);
/// gradients pointwise from the solved pair through the null parametrization
///   grad(f + ig) = (phi1^2 - phi2^2,  i(phi1^2 + phi2^2),  2 phi1 phi2),
/// whose x-component is the quadrature integrand and whose self-dot vanishes
/// identically — so the conjugacy defect is bounded by the solver tolerance
/// rather than by cross-line differencing.
inline ConjugatePair conjugate_pair_from_seed(const HolomorphicSeed& seed,
                                              NurowskiOptions opt = {}) {
  ConjugatePair pair;
  pair.provenance = "nurowski-numeric";
  pair.value = [seed, opt](const Vec3R& x) {
    return detail::solve_along_line(seed, x.y, x.z, x.x, opt).integral;
  };
  pair.gradient = [seed, opt](const Vec3R& x) {
    const auto ls = detail::solve_along_line(seed, x.y, x.z, x.x, opt);
    const Complex p1 = ls.phi1, p2 = ls.phi2;
    return Vec3C{p1 * p1 - p2 * p2, Complex(0, 1) * (p1 * p1 + p2 * p2), 2.0 * p1 * p2};
  };
  return pair;
}

/// F = p(x) (grad f + i grad g).
inline Vec3C field_from_conjugate_pair(const ConjugatePair& pair,
                                       const std::function<Complex(const Vec3R&)>& p,
                                       const Vec3R& x) {
  return p(x) * pair.gradient(x);
}

// ---- best-effort profile search --------------------------------------------

/// Least-squares score of the divergence/shear residuals at probe points.
inline double profile_residual_score(const RationalMap& map, const ProfileFunctions& profiles,
                                     const std::vector<Vec3R>& points) {
  double acc = 0;
  int used = 0;
  for (const Vec3R& x : points) {
    const IcResiduals r = initial_condition_residuals(map, profiles, x);
    if (r.degenerate) continue;
    acc += r.div_E * r.div_E + r.sf1 * r.sf1 + r.sf2 * r.sf2;
    ++used;
  }
  if (used == 0) return std::numeric_limits<double>::infinity();
  return acc / used;
}

struct ProfileSearchResult {
  ProfileFunctions profiles;
  double score{};
  double initial_score{};
};

/// Best-effort coordinate search over low-order chi-polynomial perturbations
/// of the default profiles.  The underlying PDE system is not solved — the
/// search only reports the best residual landscape it finds.
inline ProfileSearchResult search_profiles(const RationalMap& map,
                                           const std::vector<Vec3R>& points,
                                           int passes = 2) {
  auto build = [](double a, double b, double c) {
    ProfileFunctions p;
    p.f = TrigPoly{{{1.0, 0, 0, false}, {a, 1, 0, false}}};
    p.g = TrigPoly{{{1.0, 0, 0, false}, {b, 1, 0, false}}};
    p.h = TrigPoly{{{c, 1, 0, false}}};
    return p;
  };
  double best[3] = {0, 0, 0};
  ProfileSearchResult out;
  out.initial_score = profile_residual_score(map, build(0, 0, 0), points);
  double best_score = out.initial_score;
  const double steps[5] = {-0.5, -0.25, 0.25, 0.5, 0.0};
  for (int pass = 0; pass < passes; ++pass) {
    for (int dim = 0; dim < 3; ++dim) {
      for (double s : steps) {
        double trial[3] = {best[0], best[1], best[2]};
        trial[dim] += s;
        const double sc = profile_residual_score(map, build(trial[0], trial[1], trial[2]), points);
        if (sc < best_score) {
          best_score = sc;
          best[dim] = trial[dim];
        }
      }
    }
  }
  out.profiles = build(best[0], best[1], best[2]);
  out.score = best_score;
  return out;
}

}  // namespace nullknot
