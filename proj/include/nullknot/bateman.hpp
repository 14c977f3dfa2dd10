#pragma once

#include <utility>

#include "nullknot/core.hpp"

// Bateman potentials, the Bateman constraint, first-integral scalars, and the
// closed-form knotted family F = p grad(f + i g).

namespace nullknot {

struct KnottedFamilyParams {
  int m{1}, n{1};
  void validate() const {
    if (m < 1 || n < 1) throw ConfigError("knotted family requires m >= 1, n >= 1");
  }
};

/// The knotted null family F = grad(alpha^m) x grad(beta^n), with
///   s = r^2 - t^2 - 1 + 2iz,  w = x - iy,  q = r^2 - (t-i)^2,
///   alpha = s / q,  beta = 2 w / q.
/// Expanded into the pole-free combined form
///   F = 2 m n s^(m-1) (2w)^(n-1)
///       (q grad(s) - s grad(q)) x (q grad(w) - w grad(q)) / q^(m+n+2).
/// |q| >= 1 at every real point, so the family has no real poles.  On the
/// t = 0 slice this coincides with p grad(f + i g) for f + i g = 4 w / s and
/// p = m n s^(m+1) (2w)^(n-1) / q^(m+n+1).
inline AnalyticField knotted_family(KnottedFamilyParams params) {
  params.validate();
  const int m = params.m, n = params.n;
  auto f = [m, n](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    const Complex i(0, 1);
    const S r2 = x * x + y * y + z * z;
    const S s = r2 - t * t - 1.0 + 2.0 * i * z;
    const S w = x - i * y;
    const S ti = t - i;
    const S q = r2 - ti * ti;
    guard_denominator(q, "r^2 - (t-i)^2");
    const Vec3<S> grad_w{S(Complex(1)), S(Complex(0, -1)), S(Complex(0))};
    const Vec3<S> grad_s{2.0 * x, 2.0 * y, 2.0 * z + Complex(0, 2)};
    const Vec3<S> grad_q{2.0 * x, 2.0 * y, 2.0 * z};
    const S coeff =
        2.0 * double(m * n) * ipow(s, m - 1) * ipow(2.0 * w, n - 1) / ipow(q, m + n + 2);
    return coeff * cross(grad_s * q - grad_q * s, grad_w * q - grad_q * w);
  };
  return make_analytic_field(
      "knotted_family(" + std::to_string(m) + "," + std::to_string(n) + ")", f,
      "no real poles: |r^2 - (t-i)^2| >= 1 for real arguments");
}

// ---- Bateman pairs ---------------------------------------------------------

struct Grad4C {
  Complex t;
  Vec3C r;  // spatial gradient
};

struct PairJet1 {
  Complex a, b;
  Grad4C da, db;
};

/// Type-erased pair of complex potentials with exact 4-gradients, plus the
/// field grad(a) x grad(b) it generates (with exact Jacobian via a nested
/// derivative layer baked in at construction).
struct BatemanPair {
  std::string name;
  std::function<PairJet1(const Point4&)> jet1;
  AnalyticField field;

  /// Magnitude/phase split: (r_a, theta_a, r_b, theta_b).
  std::array<double, 4> polar(const Point4& p) const {
    const PairJet1 j = jet1(p);
    return {std::abs(j.a), std::arg(j.a), std::abs(j.b), std::arg(j.b)};
  }
};

/// `ab` has signature  template<class S> std::pair<S,S> ab(S t,S x,S y,S z).
template <class AB>
BatemanPair make_bateman_pair(std::string name, AB ab) {
  BatemanPair pair;
  pair.name = name;
  pair.jet1 = [ab](const Point4& p) -> PairJet1 {
    using D = Dual<Complex, 4>;
    auto [a, b] = ab(D::seeded(Complex(p.t), 0), D::seeded(Complex(p.x), 1),
                     D::seeded(Complex(p.y), 2), D::seeded(Complex(p.z), 3));
    PairJet1 j;
    j.a = a.v;
    j.b = b.v;
    j.da = {a.d[0], {a.d[1], a.d[2], a.d[3]}};
    j.db = {b.d[0], {b.d[1], b.d[2], b.d[3]}};
    return j;
  };
  pair.field = make_analytic_field(name + ":grad_a_x_grad_b", [ab](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    using D = Dual<S, 3>;
    auto [a, b] = ab(D(t), D::seeded(x, 0), D::seeded(y, 1), D::seeded(z, 2));
    const Vec3<S> ga{a.d[0], a.d[1], a.d[2]};
    const Vec3<S> gb{b.d[0], b.d[1], b.d[2]};
    return cross(ga, gb);
  });
  return pair;
}

/// F = E + iB = grad(alpha) x grad(beta).
inline const AnalyticField& field_from_bateman(const BatemanPair& pair) { return pair.field; }

/// Residual of the Bateman constraint
///   grad(a) x grad(b) - i (dt(a) grad(b) - dt(b) grad(a));
/// zero (to tolerance) iff the pair is Bateman at p.
inline Vec3C bateman_constraint_residual(const BatemanPair& pair, const Point4& p) {
  const PairJet1 j = pair.jet1(p);
  const Complex i(0, 1);
  return cross(j.da.r, j.db.r) - i * (j.da.t * j.db.r - j.db.t * j.da.r);
}

/// (Re{ab}, Im{ab}) at p: candidate first integrals of the field lines.
inline std::pair<double, double> first_integrals(const BatemanPair& pair, const Point4& p) {
  const Complex ab = pair.jet1(p).a * pair.jet1(p).b;
  return {ab.real(), ab.imag()};
}

/// grad(|a|^2) x grad(|b|^2); zero iff constant-magnitude surfaces are parallel.
inline Vec3R magnitude_parallel_residual(const BatemanPair& pair, const Point4& p) {
  const PairJet1 j = pair.jet1(p);
  auto grad_mag2 = [](Complex v, const Vec3C& g) -> Vec3R {
    return 2.0 * real(Vec3C{std::conj(v) * g.x, std::conj(v) * g.y, std::conj(v) * g.z});
  };
  return cross(grad_mag2(j.a, j.da.r), grad_mag2(j.b, j.db.r));
}

/// grad(theta_a) x grad(theta_b), equivalent to grad(a/a*) x grad(b/b*) up to
/// a nonzero scalar factor and free of its spurious poles.
inline Vec3R phase_parallel_residual(const BatemanPair& pair, const Point4& p) {
  const PairJet1 j = pair.jet1(p);
  if (std::abs(j.a) < detail::kPoleTolerance || std::abs(j.b) < detail::kPoleTolerance)
    throw ZeroModulusError("phase gradient at a zero of alpha or beta");
  auto grad_phase = [](Complex v, const Vec3C& g) -> Vec3R {
    return imag(Vec3C{g.x / v, g.y / v, g.z / v});
  };
  return cross(grad_phase(j.a, j.da.r), grad_phase(j.b, j.db.r));
}

/// Bateman pair generating the (m,n) knotted family:
/// alpha = (s/q)^m, beta = (2w/q)^n with s, w, q as in knotted_family.
inline BatemanPair knotted_family_pair(KnottedFamilyParams params) {
  params.validate();
  const int m = params.m, n = params.n;
  return make_bateman_pair(
      "knotted_family_pair(" + std::to_string(m) + "," + std::to_string(n) + ")",
      [m, n](auto t, auto x, auto y, auto z) {
        using S = decltype(t);
        const Complex i(0, 1);
        const S r2 = x * x + y * y + z * z;
        const S s = r2 - t * t - 1.0 + 2.0 * i * z;
        const S w = x - i * y;
        const S ti = t - i;
        const S q = r2 - ti * ti;
        guard_denominator(q, "r^2 - (t-i)^2");
        return std::make_pair(ipow(s / q, m), ipow(2.0 * w / q, n));
      });
}

}  // namespace nullknot
