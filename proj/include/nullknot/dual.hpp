#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <type_traits>

// Forward-mode dual numbers, nestable for higher derivatives.
//
// The scalar type T is typically std::complex<double> (fields are
// complex-valued functions of real coordinates) or another Dual.  Because
// every coordinate we differentiate against is real, conj() commutes with
// d/dx and is propagated componentwise.

namespace nullknot {

template <class T, std::size_t N>
struct Dual;

template <class T>
struct is_dual : std::false_type {};
template <class T, std::size_t N>
struct is_dual<Dual<T, N>> : std::true_type {};
template <class T>
inline constexpr bool is_dual_v = is_dual<T>::value;

template <class T, std::size_t N>
struct Dual {
  T v{};
  std::array<T, N> d{};

  Dual() = default;
  Dual(const T& value) : v(value) {}
  template <class U, class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
  Dual(const U& value) : v(value) {}

  static Dual seeded(const T& value, std::size_t slot) {
    Dual r(value);
    r.d[slot] = T(1);
    return r;
  }

  Dual operator-() const {
    Dual r(-v);
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -d[i];
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) d[i] = d[i] * o.v + v * o.d[i];
    v *= o.v;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    v = v / o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] = (d[i] - v * o.d[i]) / o.v;
    return *this;
  }
};

template <class T, std::size_t N>
Dual<T, N> operator+(Dual<T, N> a, const Dual<T, N>& b) { return a += b; }
template <class T, std::size_t N>
Dual<T, N> operator-(Dual<T, N> a, const Dual<T, N>& b) { return a -= b; }
template <class T, std::size_t N>
Dual<T, N> operator*(Dual<T, N> a, const Dual<T, N>& b) { return a *= b; }
template <class T, std::size_t N>
Dual<T, N> operator/(Dual<T, N> a, const Dual<T, N>& b) { return a /= b; }

// Mixed scalar/dual arithmetic promotes the scalar to a constant dual.
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator+(const Dual<T, N>& a, const U& b) { return a + Dual<T, N>(b); }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator+(const U& a, const Dual<T, N>& b) { return Dual<T, N>(a) + b; }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator-(const Dual<T, N>& a, const U& b) { return a - Dual<T, N>(b); }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator-(const U& a, const Dual<T, N>& b) { return Dual<T, N>(a) - b; }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator*(const Dual<T, N>& a, const U& b) { return a * Dual<T, N>(b); }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator*(const U& a, const Dual<T, N>& b) { return Dual<T, N>(a) * b; }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator/(const Dual<T, N>& a, const U& b) { return a / Dual<T, N>(b); }
template <class T, std::size_t N, class U,
          class = std::enable_if_t<!is_dual_v<U> && std::is_constructible_v<T, U>>>
Dual<T, N> operator/(const U& a, const Dual<T, N>& b) { return Dual<T, N>(a) / b; }

// ---- elementary functions -------------------------------------------------

using std::conj;
using std::exp;
using std::sqrt;

inline double conj(double x) { return x; }

template <class T, std::size_t N>
Dual<T, N> conj(const Dual<T, N>& a) {
  Dual<T, N> r(conj(a.v));
  for (std::size_t i = 0; i < N; ++i) r.d[i] = conj(a.d[i]);
  return r;
}

template <class T, std::size_t N>
Dual<T, N> exp(const Dual<T, N>& a) {
  const T e = exp(a.v);
  Dual<T, N> r(e);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = e * a.d[i];
  return r;
}

template <class T, std::size_t N>
Dual<T, N> sqrt(const Dual<T, N>& a) {
  const T s = sqrt(a.v);
  Dual<T, N> r(s);
  const T half = T(0.5) / s;
  for (std::size_t i = 0; i < N; ++i) r.d[i] = half * a.d[i];
  return r;
}

template <class T>
T ipow(const T& base, int n) {
  if (n == 0) return T(1);
  T acc = base;
  for (int k = 1; k < n; ++k) acc = acc * base;
  return acc;
}

// ---- value / real-part extraction ----------------------------------------

inline double value_of(double x) { return x; }
inline std::complex<double> value_of(const std::complex<double>& x) { return x; }
template <class T, std::size_t N>
auto value_of(const Dual<T, N>& x) { return value_of(x.v); }

inline double real_part(double x) { return x; }
inline double real_part(const std::complex<double>& x) { return x.real(); }
inline double imag_part(double) { return 0.0; }
inline double imag_part(const std::complex<double>& x) { return x.imag(); }

template <class T, std::size_t N>
auto real_part(const Dual<T, N>& x) {
  Dual<decltype(real_part(x.v)), N> r(real_part(x.v));
  for (std::size_t i = 0; i < N; ++i) r.d[i] = real_part(x.d[i]);
  return r;
}
template <class T, std::size_t N>
auto imag_part(const Dual<T, N>& x) {
  Dual<decltype(imag_part(x.v)), N> r(imag_part(x.v));
  for (std::size_t i = 0; i < N; ++i) r.d[i] = imag_part(x.d[i]);
  return r;
}

}  // namespace nullknot
