#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachcert/expr.hpp"

namespace reachcert {

// Closed interval [lo, hi] with outward-rounded arithmetic.
//
// Rounding policy: +, -, *, / and sqrt use error-free transforms (TwoSum /
// FMA residuals) to detect whether the round-to-nearest result is exact and,
// if not, in which direction the true value lies; endpoints are nudged by one
// ulp only when needed. This yields exact endpoints for exact operations
// (e.g. evaluating x^2 + y^2 - 1 at (1,0) gives the degenerate interval
// [0,0]) and one-ulp-tight directed rounding otherwise. libm transcendentals
// (sin, cos, exp, log) are not correctly rounded, so their results are nudged
// outward by a fixed four ulps.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  Interval() = default;
  // NOLINTNEXTLINE(google-explicit-constructor): degenerate point intervals
  Interval(double v) : lo(v), hi(v) {}
  Interval(double l, double h) : lo(l), hi(h) {
    if (!(l <= h)) throw std::invalid_argument("interval endpoints reversed");
  }

  double width() const { return hi - lo; }
  double midpoint() const { return lo + (hi - lo) / 2; }
  // Largest absolute value attained.
  double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
  // Smallest absolute value attained (0 when the interval straddles 0).
  double mig() const {
    if (contains_zero()) return 0.0;
    return std::min(std::fabs(lo), std::fabs(hi));
  }
  bool contains_zero() const { return lo <= 0.0 && 0.0 <= hi; }
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool contains(const Interval& other) const {
    return lo <= other.lo && other.hi <= hi;
  }
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }

  // Certified lower bound for |x| over the interval, and upper counterpart.
  double abs_lower() const { return mig(); }
  double abs_upper() const { return mag(); }
};

inline double next_up(double x) {
  return std::nextafter(x, std::numeric_limits<double>::infinity());
}
inline double next_down(double x) {
  return std::nextafter(x, -std::numeric_limits<double>::infinity());
}

namespace rounding {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double two_sum_err(double a, double b, double s) {
  double bv = s - a;
  return (a - (s - bv)) + (b - bv);
}

inline double add_down(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) {
    if (std::isnan(s)) return -kInf;
    return s < 0 ? -kInf : std::numeric_limits<double>::max();
  }
  return two_sum_err(a, b, s) < 0 ? next_down(s) : s;
}

inline double add_up(double a, double b) {
  double s = a + b;
  if (!std::isfinite(s)) {
    if (std::isnan(s)) return kInf;
    return s > 0 ? kInf : -std::numeric_limits<double>::max();
  }
  return two_sum_err(a, b, s) > 0 ? next_up(s) : s;
}

inline double mul_down(double a, double b) {
  double p = a * b;
  if (!std::isfinite(p)) {
    if (std::isnan(p)) return -kInf;
    return p < 0 ? -kInf : std::numeric_limits<double>::max();
  }
  // Subnormal or fully underflowed product: the FMA residual itself can
  // underflow, so nudge unconditionally. p == 0 is exact only when a factor
  // is zero.
  if (p == 0.0 ? (a != 0.0 && b != 0.0)
               : std::fabs(p) < std::numeric_limits<double>::min()) {
    return next_down(p);
  }
  double r = std::fma(a, b, -p);
  return r < 0 ? next_down(p) : p;
}

inline double mul_up(double a, double b) {
  double p = a * b;
  if (!std::isfinite(p)) {
    if (std::isnan(p)) return kInf;
    return p > 0 ? kInf : -std::numeric_limits<double>::max();
  }
  if (p == 0.0 ? (a != 0.0 && b != 0.0)
               : std::fabs(p) < std::numeric_limits<double>::min()) {
    return next_up(p);
  }
  double r = std::fma(a, b, -p);
  return r > 0 ? next_up(p) : p;
}

// Requires b != 0.
inline double div_down(double a, double b) {
  double q = a / b;
  if (!std::isfinite(q)) {
    if (std::isnan(q)) return -kInf;
    return q < 0 ? -kInf : std::numeric_limits<double>::max();
  }
  if (q != 0.0 && std::fabs(q) < std::numeric_limits<double>::min()) {
    return next_down(q);
  }
  double r = std::fma(q, b, -a);  // q*b - a; true quotient = q - r/b
  bool true_below = (r > 0) == (b > 0);
  return (r != 0.0 && true_below) ? next_down(q) : q;
}

inline double div_up(double a, double b) {
  double q = a / b;
  if (!std::isfinite(q)) {
    if (std::isnan(q)) return kInf;
    return q > 0 ? kInf : -std::numeric_limits<double>::max();
  }
  if (q != 0.0 && std::fabs(q) < std::numeric_limits<double>::min()) {
    return next_up(q);
  }
  double r = std::fma(q, b, -a);
  bool true_above = (r > 0) != (b > 0);
  return (r != 0.0 && true_above) ? next_up(q) : q;
}

// Requires a >= 0.
inline double sqrt_down(double a) {
  double s = std::sqrt(a);
  if (a != 0.0 && a < std::numeric_limits<double>::min()) {
    return next_down(s);  // s*s subnormal: residual can underflow to zero
  }
  double r = std::fma(s, s, -a);  // s^2 - a
  return r > 0 ? next_down(s) : s;
}

inline double sqrt_up(double a) {
  double s = std::sqrt(a);
  if (a != 0.0 && a < std::numeric_limits<double>::min()) {
    return next_up(s);
  }
  double r = std::fma(s, s, -a);
  return r < 0 ? next_up(s) : s;
}

inline double nudge_down(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = next_down(x);
  return x;
}
inline double nudge_up(double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = next_up(x);
  return x;
}

// Conservative double conversions for values computed in long double: the
// result is guaranteed on the stated side of the true value provided the
// long-double computation carried fewer than ~40 rounding errors, and stays
// within one double ulp of the round-to-nearest conversion.
double chop_down(long double v);
double chop_up(long double v);

}  // namespace rounding

// Raised when an interval operation leaves its domain (division by an
// interval containing zero, log over a nonpositive range, sqrt over a range
// dipping below zero).
class EnclosureDomainError : public std::runtime_error {
 public:
  explicit EnclosureDomainError(const std::string& message)
      : std::runtime_error(message) {}
};

inline Interval iadd(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = rounding::add_down(a.lo, b.lo);
  r.hi = rounding::add_up(a.hi, b.hi);
  return r;
}

inline Interval ineg(const Interval& a) {
  Interval r;
  r.lo = -a.hi;
  r.hi = -a.lo;
  return r;
}

inline Interval isub(const Interval& a, const Interval& b) {
  return iadd(a, ineg(b));
}

inline Interval imul(const Interval& a, const Interval& b) {
  using namespace rounding;
  double lo = std::min(std::min(mul_down(a.lo, b.lo), mul_down(a.lo, b.hi)),
                       std::min(mul_down(a.hi, b.lo), mul_down(a.hi, b.hi)));
  double hi = std::max(std::max(mul_up(a.lo, b.lo), mul_up(a.lo, b.hi)),
                       std::max(mul_up(a.hi, b.lo), mul_up(a.hi, b.hi)));
  Interval r;
  r.lo = lo;
  r.hi = hi;
  return r;
}

inline Interval idiv(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    throw EnclosureDomainError("division by interval containing zero");
  }
  using namespace rounding;
  double lo = std::min(std::min(div_down(a.lo, b.lo), div_down(a.lo, b.hi)),
                       std::min(div_down(a.hi, b.lo), div_down(a.hi, b.hi)));
  double hi = std::max(std::max(div_up(a.lo, b.lo), div_up(a.lo, b.hi)),
                       std::max(div_up(a.hi, b.lo), div_up(a.hi, b.hi)));
  Interval r;
  r.lo = lo;
  r.hi = hi;
  return r;
}

inline Interval iabs(const Interval& a) {
  Interval r;
  r.lo = a.mig();
  r.hi = a.mag();
  return r;
}

// Tight enclosure of x^k for a single double x (binary exponentiation with
// directed rounding on both endpoints).
Interval point_pow(double x, unsigned k);

// Enclosure of { x^k : x in a } using parity (even powers do not square the
// dependency problem: [-2,2]^2 -> [0,4]).
Interval ipow(const Interval& a, unsigned k);

Interval isqrt(const Interval& a);
Interval iexp(const Interval& a);
Interval ilog(const Interval& a);
Interval isin(const Interval& a);
Interval icos(const Interval& a);

inline Interval ihull(const Interval& a, const Interval& b) {
  Interval r;
  r.lo = std::min(a.lo, b.lo);
  r.hi = std::max(a.hi, b.hi);
  return r;
}

// Axis-aligned box [lower_1, upper_1] x ... x [lower_N, upper_N].
struct BoxDomain {
  std::vector<double> lower;
  std::vector<double> upper;

  BoxDomain() = default;
  BoxDomain(std::vector<double> lo, std::vector<double> hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("box endpoint dimensions differ");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) {
        throw std::invalid_argument("box has reversed endpoints");
      }
    }
  }

  static BoxDomain cube(double center_offset, double half_width, int dim) {
    std::vector<double> lo(dim, center_offset - half_width);
    std::vector<double> hi(dim, center_offset + half_width);
    return BoxDomain(std::move(lo), std::move(hi));
  }

  int dim() const { return static_cast<int>(lower.size()); }
  Interval axis(int i) const { return Interval(lower.at(i), upper.at(i)); }
  std::vector<double> midpoint() const {
    std::vector<double> m(lower.size());
    for (std::size_t i = 0; i < lower.size(); ++i) {
      m[i] = lower[i] + (upper[i] - lower[i]) / 2;
    }
    return m;
  }
  bool contains(std::span<const double> p) const {
    if (p.size() != lower.size()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (p[i] < lower[i] || p[i] > upper[i]) return false;
    }
    return true;
  }
  bool contains(const BoxDomain& other) const {
    if (other.dim() != dim()) return false;
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (other.lower[i] < lower[i] || other.upper[i] > upper[i]) return false;
    }
    return true;
  }
};

// Natural interval extension of e over the box (each variable replaced by its
// axis interval, every operation outward-rounded). The result contains
// { e(x) : x in d }.
Interval enclose(const Expr& e, const BoxDomain& d);

// Enclosure of e at a single representable point (degenerate box).
Interval enclose_point(const Expr& e, std::span<const double> point);

// Sharper enclosure of e at a representable point: the evaluation runs in
// extended-precision interval arithmetic under the same error-free-transform
// policy (exact results stay exact) and the endpoints are converted outward
// to doubles at the end. Point values as small as ~1e-17 times the
// intermediate magnitudes keep a certifiable sign, which double-precision
// enclosures cannot deliver; grid-vertex sign certification depends on this.
Interval enclose_point_sharp(const Expr& e, std::span<const double> point);

// Certified upper bound for sup over d of |grad f_i|_2, via the interval
// magnitudes of the gradient components. refine_depth > 0 bisects every axis
// that many times and takes the max over the pieces, which tightens the
// natural extension's dependency slack.
double bound_grad_norm2(const FunctionSystem& fs, int i, const BoxDomain& d,
                        int refine_depth = 0);

// Certified upper bound for sup over d of |Hess f_i|_2 via Frobenius-norm
// majorization |A|_2 <= |A|_F.
double bound_hess_norm2(const FunctionSystem& fs, int i, const BoxDomain& d,
                        int refine_depth = 0);

}  // namespace reachcert
