#pragma once

#include <cmath>

#include "qf/common.hpp"

namespace qf {

// Truncated univariate jet: value and first two derivatives with respect to
// one independent variable. Arithmetic propagates derivatives exactly.
struct Jet2 {
  Real v = 0, d = 0, dd = 0;

  static Jet2 var(Real x) { return {x, 1, 0}; }
  static Jet2 cst(Real x) { return {x, 0, 0}; }
};

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.d, -a.dd}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2 * a.d * b.d + a.v * b.dd};
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) {
  Real w = a.v / b.v;
  Real wd = (a.d - w * b.d) / b.v;
  Real wdd = (a.dd - w * b.dd - 2 * wd * b.d) / b.v;
  return {w, wd, wdd};
}
inline Jet2 operator+(const Jet2& a, Real s) { return {a.v + s, a.d, a.dd}; }
inline Jet2 operator+(Real s, const Jet2& a) { return a + s; }
inline Jet2 operator-(const Jet2& a, Real s) { return {a.v - s, a.d, a.dd}; }
inline Jet2 operator-(Real s, const Jet2& a) { return {s - a.v, -a.d, -a.dd}; }
inline Jet2 operator*(const Jet2& a, Real s) { return {a.v * s, a.d * s, a.dd * s}; }
inline Jet2 operator*(Real s, const Jet2& a) { return a * s; }
inline Jet2 operator/(const Jet2& a, Real s) { return {a.v / s, a.d / s, a.dd / s}; }
inline Jet2 operator/(Real s, const Jet2& a) { return Jet2::cst(s) / a; }

inline Jet2 sqrt(const Jet2& a) {
  Real r = std::sqrt(a.v);
  Real rd = a.d / (2 * r);
  Real rdd = (a.dd / 2 - rd * rd) / r;
  return {r, rd, rdd};
}

inline Jet2 sq(const Jet2& a) { return a * a; }

// Chain rule: f is a jet with respect to its own argument at inner.v; the
// result is the jet of f(inner(x)) with respect to x.
inline Jet2 compose(const Jet2& f, const Jet2& inner) {
  return {f.v, f.d * inner.d, f.dd * inner.d * inner.d + f.d * inner.dd};
}

}  // namespace qf
