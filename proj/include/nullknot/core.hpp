#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "nullknot/dual.hpp"
#include "nullknot/errors.hpp"
#include "nullknot/parallel.hpp"

namespace nullknot {

using Complex = std::complex<double>;

// ---- small vector / matrix types ------------------------------------------

template <class T>
struct Vec3 {
  T x{}, y{}, z{};

  T& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  const T& operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

using Vec3R = Vec3<double>;
using Vec3C = Vec3<Complex>;

template <class T>
Vec3<T> operator+(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class T>
Vec3<T> operator-(const Vec3<T>& a) {
  return {-a.x, -a.y, -a.z};
}
template <class T, class S>
auto operator*(const S& s, const Vec3<T>& a) -> Vec3<decltype(s * a.x)> {
  return {s * a.x, s * a.y, s * a.z};
}
template <class T, class S>
auto operator*(const Vec3<T>& a, const S& s) -> Vec3<decltype(a.x * s)> {
  return {a.x * s, a.y * s, a.z * s};
}
template <class T, class S>
auto operator/(const Vec3<T>& a, const S& s) -> Vec3<decltype(a.x / s)> {
  return {a.x / s, a.y / s, a.z / s};
}

/// Unconjugated dot product (F.F is the Riemann-Silberstein null invariant).
template <class T>
T dot(const Vec3<T>& a, const Vec3<T>& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <class T>
Vec3<T> cross(const Vec3<T>& a, const Vec3<T>& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3R& a) { return std::sqrt(dot(a, a)); }
inline double norm(const Vec3C& a) {
  return std::sqrt(std::norm(a.x) + std::norm(a.y) + std::norm(a.z));
}

inline Vec3R real(const Vec3C& a) { return {a.x.real(), a.y.real(), a.z.real()}; }
inline Vec3R imag(const Vec3C& a) { return {a.x.imag(), a.y.imag(), a.z.imag()}; }
inline Vec3C complexify(const Vec3R& re, const Vec3R& im) {
  return {{re.x, im.x}, {re.y, im.y}, {re.z, im.z}};
}
inline Vec3C complexify(const Vec3R& re) { return {{re.x, 0.0}, {re.y, 0.0}, {re.z, 0.0}}; }

/// 3x3 matrix with M[i][j] convention; for field Jacobians J[i][j] = d_j F_i.
template <class T>
struct Mat3 {
  std::array<std::array<T, 3>, 3> m{};
  std::array<T, 3>& operator[](int i) { return m[i]; }
  const std::array<T, 3>& operator[](int i) const { return m[i]; }
};

using Mat3R = Mat3<double>;
using Jac3C = Mat3<Complex>;

inline Mat3R real(const Jac3C& j) {
  Mat3R r;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i][k] = j[i][k].real();
  return r;
}
inline Mat3R imag(const Jac3C& j) {
  Mat3R r;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i][k] = j[i][k].imag();
  return r;
}

/// curl extracted from a Jacobian: (curl F)_i = eps_ijk d_j F_k = eps_ijk J[k][j].
template <class T>
Vec3<T> curl_from_jacobian(const Mat3<T>& j) {
  return {j[2][1] - j[1][2], j[0][2] - j[2][0], j[1][0] - j[0][1]};
}

template <class T>
T trace(const Mat3<T>& j) {
  return j[0][0] + j[1][1] + j[2][2];
}

template <class T>
double max_abs(const Mat3<T>& j) {
  double m = 0;
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) m = std::max(m, std::abs(j[i][k]));
  return m;
}

// ---- spacetime point -------------------------------------------------------

struct Point4 {
  double t{}, x{}, y{}, z{};
  Vec3R r() const { return {x, y, z}; }
};

inline Point4 at(double t, const Vec3R& r) { return {t, r.x, r.y, r.z}; }

// ---- analytic field contract ----------------------------------------------

struct FieldJet1 {
  Vec3C F;
  Jac3C J;  // J[i][j] = d_j F_i, spatial only
};

struct FieldJet2 {
  Vec3C F;
  Jac3C J;
  std::array<Jac3C, 3> H;  // H[k][i][j] = d_k d_j F_i
};

/// Type-erased closed-form field evaluator.  Evaluation is pure; spatial
/// derivatives are exact (dual-number propagation through the closed form).
struct AnalyticField {
  std::string name;
  std::string validity_notes;  // declared pole loci, if any
  std::function<Vec3C(const Point4&)> value;
  std::function<FieldJet1(const Point4&)> jet1;
  std::function<FieldJet2(const Point4&)> jet2;
};

namespace detail {

constexpr double kPoleTolerance = 1e-12;

}  // namespace detail

/// Fields call this on declared denominators before dividing.
template <class S>
void guard_denominator(const S& den, const char* what) {
  if (std::abs(value_of(den)) < detail::kPoleTolerance)
    throw PoleError(std::string("declared denominator vanished: ") + what);
}

/// Wraps a functor `f` with signature  template<class S> Vec3<S> f(S t,S x,S y,S z)
/// into an AnalyticField carrying exact first and second spatial derivatives.
template <class F>
AnalyticField make_analytic_field(std::string name, F f, std::string validity_notes = "") {
  AnalyticField a;
  a.name = std::move(name);
  a.validity_notes = std::move(validity_notes);
  a.value = [f](const Point4& p) -> Vec3C {
    return f(Complex(p.t), Complex(p.x), Complex(p.y), Complex(p.z));
  };
  a.jet1 = [f](const Point4& p) -> FieldJet1 {
    using D = Dual<Complex, 3>;
    Vec3<D> v = f(D(Complex(p.t)), D::seeded(Complex(p.x), 0), D::seeded(Complex(p.y), 1),
                  D::seeded(Complex(p.z), 2));
    FieldJet1 j;
    for (int i = 0; i < 3; ++i) {
      j.F[i] = v[i].v;
      for (int k = 0; k < 3; ++k) j.J[i][k] = v[i].d[k];
    }
    return j;
  };
  a.jet2 = [f](const Point4& p) -> FieldJet2 {
    using D1 = Dual<Complex, 3>;
    using D2 = Dual<D1, 3>;
    auto seed2 = [](double c, int slot) {
      D2 s(D1::seeded(Complex(c), slot));
      s.d[slot] = D1(Complex(1.0));
      return s;
    };
    Vec3<D2> v = f(D2(D1(Complex(p.t))), seed2(p.x, 0), seed2(p.y, 1), seed2(p.z, 2));
    FieldJet2 j;
    for (int i = 0; i < 3; ++i) {
      j.F[i] = v[i].v.v;
      for (int k = 0; k < 3; ++k) j.J[i][k] = v[i].v.d[k];
      for (int m = 0; m < 3; ++m)
        for (int k = 0; k < 3; ++k) j.H[m][i][k] = v[i].d[m].d[k];
    }
    return j;
  };
  return a;
}

inline FieldJet1 eval(const AnalyticField& field, const Point4& p) { return field.jet1(p); }

/// Central-difference Jacobian, test oracle for the exact one.
inline Jac3C eval_fd_jacobian(const AnalyticField& field, const Point4& p, double h) {
  Jac3C j;
  for (int axis = 0; axis < 3; ++axis) {
    Point4 hi = p, lo = p;
    double* phi = axis == 0 ? &hi.x : (axis == 1 ? &hi.y : &hi.z);
    double* plo = axis == 0 ? &lo.x : (axis == 1 ? &lo.y : &lo.z);
    *phi += h;
    *plo -= h;
    const Vec3C fhi = field.value(hi), flo = field.value(lo);
    for (int i = 0; i < 3; ++i) j[i][axis] = (fhi[i] - flo[i]) / (2.0 * h);
  }
  return j;
}

/// 4th-order time derivative: central difference plus one Richardson step.
inline Vec3C time_derivative_fd(const AnalyticField& field, const Point4& p, double h) {
  auto shift = [&](double dt) {
    Point4 q = p;
    q.t += dt;
    return field.value(q);
  };
  const Vec3C d1 = (shift(h) - shift(-h)) / (2.0 * h);
  const Vec3C d2 = (shift(2 * h) - shift(-2 * h)) / (4.0 * h);
  return (4.0 * d1 - d2) / 3.0;
}

// ---- uniform periodic grid -------------------------------------------------

struct GridSpec {
  double L{};   // domain [-L, L)^3
  int N{};      // points per axis, power of two, >= 8
  double t{};   // time stamp

  void validate() const {
    if (!(L > 0)) throw ConfigError("GridSpec: L must be positive");
    if (N < 8 || (N & (N - 1)) != 0) throw ConfigError("GridSpec: N must be a power of two >= 8");
  }
  double spacing() const { return 2.0 * L / N; }
  double coord(int j) const { return -L + 2.0 * L * j / N; }
  std::size_t points() const { return std::size_t(N) * N * N; }
};

/// Complex 3-vector samples on the grid, z index fastest.
struct GridField {
  GridSpec spec;
  std::vector<Vec3C> f;

  std::size_t index(int ix, int iy, int iz) const {
    return (std::size_t(ix) * spec.N + iy) * spec.N + iz;
  }
  Vec3C& at(int ix, int iy, int iz) { return f[index(ix, iy, iz)]; }
  const Vec3C& at(int ix, int iy, int iz) const { return f[index(ix, iy, iz)]; }
};

inline GridField make_grid(const GridSpec& spec) {
  spec.validate();
  GridField g;
  g.spec = spec;
  g.f.assign(spec.points(), Vec3C{});
  return g;
}

inline double grid_max_norm(const GridField& g) {
  double m = 0;
  for (const auto& v : g.f) m = std::max(m, norm(v));
  return m;
}

inline GridField sample(const AnalyticField& field, const GridSpec& spec) {
  GridField g = make_grid(spec);
  parallel_for(spec.N, [&](int ix) {
    const double x = spec.coord(ix);
    for (int iy = 0; iy < spec.N; ++iy) {
      const double y = spec.coord(iy);
      for (int iz = 0; iz < spec.N; ++iz) {
        g.at(ix, iy, iz) = field.value({spec.t, x, y, spec.coord(iz)});
      }
    }
  });
  return g;
}

}  // namespace nullknot
