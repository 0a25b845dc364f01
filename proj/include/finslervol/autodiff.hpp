#pragma once

// Forward-mode scalars used to differentiate DSL expressions in y.
//
// Dual<T>  carries one directional derivative.
// Jet2<T>  carries value, gradient and the upper triangle of the Hessian with
//          respect to up to kMaxDim seeded variables.
//
// Jet2<Dual<double>> seeded with a direction e_k in the inner dual yields the
// k-th partial of every Hessian entry, which is how third derivatives are
// obtained.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "finslervol/expr.hpp"

namespace finslervol {

inline constexpr int kMaxDim = 8;

template <typename T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(double value) : v(value), d(0.0) {}  // NOLINT: literals lift implicitly
  Dual(T value, T deriv) : v(value), d(deriv) {}

  Dual operator-() const { return {-v, -d}; }
  Dual& operator+=(const Dual& o) { v += o.v; d += o.d; return *this; }
  Dual& operator-=(const Dual& o) { v -= o.v; d -= o.d; return *this; }
  Dual& operator*=(const Dual& o) { d = d * o.v + v * o.d; v *= o.v; return *this; }
  Dual& operator/=(const Dual& o) {
    T inv = T(1.0) / o.v;
    v *= inv;
    d = (d - v * o.d) * inv;
    return *this;
  }
};

template <typename T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <typename T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <typename T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <typename T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }

namespace detail {

// Value and first two derivatives of an elementary function at a point.
template <typename T>
struct Taylor2 {
  T f, f1, f2;
};

template <typename T>
Taylor2<T> taylor_sqrt(const T& a) {
  using std::sqrt;
  T s = sqrt(a);
  T f1 = T(0.5) / s;
  return {s, f1, T(-0.5) * f1 / a};
}

template <typename T>
Taylor2<T> taylor_pow(const T& a, double c) {
  using std::pow;
  if (c == 1.0) return {a, T(1.0), T(0.0)};
  if (c == 2.0) return {a * a, T(2.0) * a, T(2.0)};
  return {pow(a, c), T(c) * pow(a, c - 1.0), T(c * (c - 1.0)) * pow(a, c - 2.0)};
}

template <typename T>
Taylor2<T> taylor_exp(const T& a) {
  using std::exp;
  T e = exp(a);
  return {e, e, e};
}

template <typename T>
Taylor2<T> taylor_log(const T& a) {
  using std::log;
  T inv = T(1.0) / a;
  return {log(a), inv, -(inv * inv)};
}

template <typename T>
Taylor2<T> taylor_sin(const T& a) {
  using std::cos;
  using std::sin;
  T s = sin(a);
  return {s, cos(a), -s};
}

template <typename T>
Taylor2<T> taylor_cos(const T& a) {
  using std::cos;
  using std::sin;
  T c = cos(a);
  return {c, -sin(a), -c};
}

}  // namespace detail

inline bool all_finite(double v) { return std::isfinite(v); }
inline double value_of(double v) { return v; }

template <typename T> double value_of(const Dual<T>& a) { return value_of(a.v); }

// sgn has derivative 0 everywhere; abs has derivative sgn (0 at 0).
template <typename T> Dual<T> sgn(const Dual<T>& a) { return Dual<T>(sgn(a.v), T(0.0)); }
template <typename T> Dual<T> abs(const Dual<T>& a) {
  using std::abs;
  T s = sgn(a.v);
  return Dual<T>(abs(a.v), s * a.d);
}

#define FINSLERVOL_DUAL_UNARY(name)                              \
  template <typename T>                                          \
  Dual<T> name(const Dual<T>& a) {                               \
    auto t = detail::taylor_##name(a.v);                         \
    return Dual<T>(t.f, t.f1 * a.d);                             \
  }
FINSLERVOL_DUAL_UNARY(sqrt)
FINSLERVOL_DUAL_UNARY(exp)
FINSLERVOL_DUAL_UNARY(log)
FINSLERVOL_DUAL_UNARY(sin)
FINSLERVOL_DUAL_UNARY(cos)
#undef FINSLERVOL_DUAL_UNARY

template <typename T> Dual<T> pow(const Dual<T>& a, double c) {
  auto t = detail::taylor_pow(a.v, c);
  return Dual<T>(t.f, t.f1 * a.d);
}

template <typename T>
bool all_finite(const Dual<T>& a) {
  return all_finite(a.v) && all_finite(a.d);
}

/// Second-order jet over `n` active variables. Hessian stored as the upper
/// triangle, so symmetry holds by construction.
template <typename T>
struct Jet2 {
  static constexpr int kTri = kMaxDim * (kMaxDim + 1) / 2;

  int n = 0;
  T v{};
  std::array<T, kMaxDim> g{};
  std::array<T, kTri> h{};

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT: literals lift implicitly

  static Jet2 variable(int n, int i, T value) {
    Jet2 j;
    j.v = value;
    j.n = n;
    j.g[i] = T(1.0);
    return j;
  }

  static constexpr int tri(int i, int j) {  // i <= j
    return i * kMaxDim - i * (i - 1) / 2 + (j - i);
  }

  const T& hess(int i, int j) const { return i <= j ? h[tri(i, j)] : h[tri(j, i)]; }

  Jet2 operator-() const {
    Jet2 r = *this;
    r.v = -v;
    for (int i = 0; i < n; ++i) r.g[i] = -g[i];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) r.h[tri(i, j)] = -h[tri(i, j)];
    return r;
  }

  Jet2& operator+=(const Jet2& o) {
    widen(o.n);
    v += o.v;
    for (int i = 0; i < o.n; ++i) g[i] += o.g[i];
    for (int i = 0; i < o.n; ++i)
      for (int j = i; j < o.n; ++j) h[tri(i, j)] += o.h[tri(i, j)];
    return *this;
  }

  Jet2& operator-=(const Jet2& o) {
    widen(o.n);
    v -= o.v;
    for (int i = 0; i < o.n; ++i) g[i] -= o.g[i];
    for (int i = 0; i < o.n; ++i)
      for (int j = i; j < o.n; ++j) h[tri(i, j)] -= o.h[tri(i, j)];
    return *this;
  }

  /// Applies a scalar function given its local Taylor data.
  Jet2 chain(const detail::Taylor2<T>& t) const {
    Jet2 r;
    r.n = n;
    r.v = t.f;
    for (int i = 0; i < n; ++i) r.g[i] = t.f1 * g[i];
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) r.h[tri(i, j)] = t.f1 * h[tri(i, j)] + t.f2 * g[i] * g[j];
    return r;
  }

 private:
  void widen(int m) {
    if (m > n) n = m;
  }
};

template <typename T> Jet2<T> operator+(Jet2<T> a, const Jet2<T>& b) { return a += b; }
template <typename T> Jet2<T> operator-(Jet2<T> a, const Jet2<T>& b) { return a -= b; }

template <typename T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  using J = Jet2<T>;
  J r;
  r.n = a.n > b.n ? a.n : b.n;
  r.v = a.v * b.v;
  for (int i = 0; i < r.n; ++i) r.g[i] = a.g[i] * b.v + a.v * b.g[i];
  for (int i = 0; i < r.n; ++i)
    for (int j = i; j < r.n; ++j) {
      const int k = J::tri(i, j);
      r.h[k] = a.h[k] * b.v + a.v * b.h[k] + a.g[i] * b.g[j] + a.g[j] * b.g[i];
    }
  return r;
}

template <typename T>
Jet2<T> operator/(const Jet2<T>& a, const Jet2<T>& b) {
  const T inv = T(1.0) / b.v;
  if (b.n == 0) {
    Jet2<T> r = a;
    r.v = a.v * inv;
    for (int i = 0; i < a.n; ++i) r.g[i] = a.g[i] * inv;
    for (int i = 0; i < a.n; ++i)
      for (int j = i; j < a.n; ++j) r.h[Jet2<T>::tri(i, j)] = a.h[Jet2<T>::tri(i, j)] * inv;
    return r;
  }
  return a * b.chain({inv, -(inv * inv), T(2.0) * inv * inv * inv});
}

template <typename T> double value_of(const Jet2<T>& a) { return value_of(a.v); }

template <typename T> Jet2<T> sgn(const Jet2<T>& a) {
  Jet2<T> r;
  r.v = sgn(a.v);
  r.n = a.n;
  return r;
}
template <typename T> Jet2<T> abs(const Jet2<T>& a) {
  using std::abs;
  return a.chain({abs(a.v), sgn(a.v), T(0.0)});
}

#define FINSLERVOL_JET_UNARY(name) \
  template <typename T>            \
  Jet2<T> name(const Jet2<T>& a) { \
    return a.chain(detail::taylor_##name(a.v)); \
  }
FINSLERVOL_JET_UNARY(sqrt)
FINSLERVOL_JET_UNARY(exp)
FINSLERVOL_JET_UNARY(log)
FINSLERVOL_JET_UNARY(sin)
FINSLERVOL_JET_UNARY(cos)
#undef FINSLERVOL_JET_UNARY

template <typename T> Jet2<T> pow(const Jet2<T>& a, double c) { return a.chain(detail::taylor_pow(a.v, c)); }

template <typename T>
bool all_finite(const Jet2<T>& a) {
  if (!all_finite(a.v)) return false;
  for (int i = 0; i < a.n; ++i) {
    if (!all_finite(a.g[i])) return false;
    for (int j = i; j < a.n; ++j)
      if (!all_finite(a.h[Jet2<T>::tri(i, j)])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Derivatives of expressions in y.

struct HessianResult {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  bool finite = true;
};

/// Value, gradient and Hessian of `L` in y at (x, y). Non-finite results are
/// reported through `finite`, never thrown.
HessianResult hessian_y_unchecked(const Expr& L, std::span<const double> x, std::span<const double> y);

/// As above; throws NonFiniteResult on a domain violation.
HessianResult hessian_y(const Expr& L, std::span<const double> x, std::span<const double> y);

/// dg[k](i, j) = d g_ij / d y^k = 1/2 d^3 L / dy^i dy^j dy^k, fully symmetrized.
std::vector<Eigen::MatrixXd> third_directional(const Expr& L, std::span<const double> x,
                                               std::span<const double> y);

/// First derivative of `e` along direction `dir` in y (dual-number evaluation).
double directional_derivative(const Expr& e, std::span<const double> x, std::span<const double> y,
                              std::span<const double> dir);

}  // namespace finslervol
