#include "reachcert/interval.hpp"

#include <numbers>

namespace reachcert {

namespace {

using rounding::nudge_down;
using rounding::nudge_up;

// double(pi) < pi, so the nearest double is already a lower bound.
constexpr double kPiLo = std::numbers::pi_v<double>;
const double kPiHi = next_up(kPiLo);
constexpr double kTwoPiLo = 2.0 * std::numbers::pi_v<double>;  // exact doubling
const double kTwoPiHi = next_up(kTwoPiLo);
constexpr double kHalfPiLo = std::numbers::pi_v<double> / 2.0;

constexpr int kLibmUlps = 4;  // outward nudge for not-correctly-rounded libm

// Conservative test: does [lo, hi], inflated by a relative slack comfortably
// above the rounding error of the candidate computation, contain a point
// congruent to `target` modulo 2*pi? False negatives are unsound, so every
// comparison errs toward "yes".
bool meets_phase(double lo, double hi, double target) {
  double m = std::max({std::fabs(lo), std::fabs(hi), 1.0});
  double slack = m * 1e-12;
  double l = lo - slack;
  double h = hi + slack;
  double k = std::floor((l - target) / kTwoPiLo) - 1.0;
  for (int j = 0; j <= 4; ++j) {
    double kk = k + j;
    double c_lo = target + kk * kTwoPiLo;
    double c_hi = target + kk * kTwoPiHi;
    if (std::min(c_lo, c_hi) > h) break;
    if (std::max(c_lo, c_hi) >= l && std::min(c_lo, c_hi) <= h) return true;
  }
  return false;
}

}  // namespace

namespace rounding {

double chop_down(long double v) {
  if (v == 0.0L) return 0.0;
  if (std::isinf(static_cast<double>(v))) {
    return v > 0 ? std::numeric_limits<double>::max()
                 : -std::numeric_limits<double>::infinity();
  }
  long double guarded = v - fabsl(v) * 2e-18L;
  double d = static_cast<double>(guarded);
  if (static_cast<long double>(d) > guarded) d = next_down(d);
  return d;
}

double chop_up(long double v) {
  if (v == 0.0L) return 0.0;
  if (std::isinf(static_cast<double>(v))) {
    return v > 0 ? std::numeric_limits<double>::infinity()
                 : -std::numeric_limits<double>::max();
  }
  long double guarded = v + fabsl(v) * 2e-18L;
  double d = static_cast<double>(guarded);
  if (static_cast<long double>(d) < guarded) d = next_up(d);
  return d;
}

}  // namespace rounding

Interval point_pow(double x, unsigned k) {
  Interval acc(1.0);
  Interval base(x);
  while (k != 0) {
    if (k & 1u) acc = imul(acc, base);
    k >>= 1u;
    if (k != 0) base = imul(base, base);
  }
  return acc;
}

Interval ipow(const Interval& a, unsigned k) {
  if (k == 0) return Interval(1.0);
  if (k == 1) return a;
  if (k % 2 == 0) {
    Interval upper = point_pow(a.mag(), k);
    double lo = 0.0;
    if (!a.contains_zero()) {
      lo = point_pow(a.mig(), k).lo;
    }
    Interval r;
    r.lo = lo;
    r.hi = upper.hi;
    return r;
  }
  Interval r;
  r.lo = point_pow(a.lo, k).lo;
  r.hi = point_pow(a.hi, k).hi;
  return r;
}

Interval isqrt(const Interval& a) {
  if (a.lo < 0.0) {
    throw EnclosureDomainError("sqrt over interval dipping below zero");
  }
  Interval r;
  r.lo = rounding::sqrt_down(a.lo);
  r.hi = rounding::sqrt_up(a.hi);
  return r;
}

Interval iexp(const Interval& a) {
  Interval r;
  r.lo = std::max(0.0, nudge_down(std::exp(a.lo), kLibmUlps));
  r.hi = nudge_up(std::exp(a.hi), kLibmUlps);
  if (std::isnan(r.hi)) r.hi = rounding::kInf;
  return r;
}

Interval ilog(const Interval& a) {
  if (a.lo <= 0.0) {
    throw EnclosureDomainError("log over interval touching nonpositive values");
  }
  Interval r;
  r.lo = nudge_down(std::log(a.lo), kLibmUlps);
  r.hi = nudge_up(std::log(a.hi), kLibmUlps);
  return r;
}

Interval isin(const Interval& a) {
  if (!a.finite() || a.mag() > 1e8 || a.width() >= kTwoPiHi) {
    return Interval(-1.0, 1.0);
  }
  double slo = std::sin(a.lo);
  double shi = std::sin(a.hi);
  double lo = std::max(-1.0, nudge_down(std::min(slo, shi), kLibmUlps));
  double hi = std::min(1.0, nudge_up(std::max(slo, shi), kLibmUlps));
  if (meets_phase(a.lo, a.hi, kHalfPiLo)) hi = 1.0;
  if (meets_phase(a.lo, a.hi, -kHalfPiLo)) lo = -1.0;
  Interval r;
  r.lo = lo;
  r.hi = hi;
  return r;
}

Interval icos(const Interval& a) {
  if (!a.finite() || a.mag() > 1e8 || a.width() >= kTwoPiHi) {
    return Interval(-1.0, 1.0);
  }
  double clo = std::cos(a.lo);
  double chi = std::cos(a.hi);
  double lo = std::max(-1.0, nudge_down(std::min(clo, chi), kLibmUlps));
  double hi = std::min(1.0, nudge_up(std::max(clo, chi), kLibmUlps));
  if (meets_phase(a.lo, a.hi, 0.0)) hi = 1.0;
  if (meets_phase(a.lo, a.hi, kPiLo)) lo = -1.0;
  Interval r;
  r.lo = lo;
  r.hi = hi;
  return r;
}

namespace {

template <class Lookup>
Interval enclose_rec(const Expr& e, const Lookup& lookup) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      return Interval(e.constant_value());
    case K::Variable:
      return lookup(e.variable_index());
    case K::Sum: {
      Interval acc(0.0);
      for (const Expr& c : e.children()) {
        acc = iadd(acc, enclose_rec(c, lookup));
      }
      return acc;
    }
    case K::Product: {
      Interval acc(1.0);
      for (const Expr& c : e.children()) {
        acc = imul(acc, enclose_rec(c, lookup));
      }
      return acc;
    }
    case K::Negate:
      return ineg(enclose_rec(e.children().front(), lookup));
    case K::Quotient:
      return idiv(enclose_rec(e.children()[0], lookup),
                  enclose_rec(e.children()[1], lookup));
    case K::Power:
      return ipow(enclose_rec(e.children().front(), lookup), e.exponent());
    case K::Sin:
      return isin(enclose_rec(e.children().front(), lookup));
    case K::Cos:
      return icos(enclose_rec(e.children().front(), lookup));
    case K::Exp:
      return iexp(enclose_rec(e.children().front(), lookup));
    case K::Log:
      return ilog(enclose_rec(e.children().front(), lookup));
    case K::Sqrt:
      return isqrt(enclose_rec(e.children().front(), lookup));
  }
  throw std::logic_error("unhandled expression kind in enclose");
}

}  // namespace

Interval enclose(const Expr& e, const BoxDomain& d) {
  auto lookup = [&d](int i) -> Interval {
    if (i < 0 || i >= d.dim()) {
      throw EnclosureDomainError("variable index outside box dimension");
    }
    return d.axis(i);
  };
  return enclose_rec(e, lookup);
}

Interval enclose_point(const Expr& e, std::span<const double> point) {
  auto lookup = [point](int i) -> Interval {
    if (i < 0 || static_cast<std::size_t>(i) >= point.size()) {
      throw EnclosureDomainError("variable index outside point dimension");
    }
    return Interval(point[static_cast<std::size_t>(i)]);
  };
  return enclose_rec(e, lookup);
}

namespace {

// ---------------------------------------------------------------------------
// Extended-precision mirror of the interval kernel, used only by
// enclose_point_sharp. Identical policy to the double kernel: error-free
// transforms detect exact endpoints, inexact ones get a one-ulp outward
// nudge, libm calls get kLibmUlps. Running the whole recursion in long
// double and converting outward once at the end keeps point enclosures a few
// long-double ulps wide, so a sign that sits ~1e-16 away from zero relative
// to the intermediates — invisible to double evaluation — stays certifiable.

constexpr long double kLdInf = std::numeric_limits<long double>::infinity();
constexpr long double kLdMax = std::numeric_limits<long double>::max();
constexpr long double kLdMin = std::numeric_limits<long double>::min();

long double lnext_up(long double x) { return std::nextafter(x, kLdInf); }
long double lnext_down(long double x) { return std::nextafter(x, -kLdInf); }

long double lnudge_up(long double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = lnext_up(x);
  return x;
}
long double lnudge_down(long double x, int ulps) {
  for (int i = 0; i < ulps; ++i) x = lnext_down(x);
  return x;
}

// Knuth two-sum error term; exact whenever s = fl(a + b) is finite.
long double ltwo_sum_err(long double a, long double b, long double s) {
  long double bv = s - a;
  long double av = s - bv;
  return (a - av) + (b - bv);
}

long double ladd_down(long double a, long double b) {
  long double s = a + b;
  if (!std::isfinite(s)) {
    if (std::isnan(s)) return -kLdInf;
    return s < 0.0L ? s : kLdMax;
  }
  return ltwo_sum_err(a, b, s) < 0.0L ? lnext_down(s) : s;
}

long double ladd_up(long double a, long double b) {
  long double s = a + b;
  if (!std::isfinite(s)) {
    if (std::isnan(s)) return kLdInf;
    return s > 0.0L ? s : -kLdMax;
  }
  return ltwo_sum_err(a, b, s) > 0.0L ? lnext_up(s) : s;
}

long double lmul_down(long double a, long double b) {
  long double p = a * b;
  if (!std::isfinite(p)) {
    if (std::isnan(p)) return -kLdInf;
    return p < 0.0L ? -kLdInf : kLdMax;
  }
  if (p == 0.0L ? (a != 0.0L && b != 0.0L) : std::fabs(p) < kLdMin) {
    return lnext_down(p);  // (sub)underflow: FMA residual unreliable
  }
  long double r = std::fma(a, b, -p);
  return r < 0.0L ? lnext_down(p) : p;
}

long double lmul_up(long double a, long double b) {
  long double p = a * b;
  if (!std::isfinite(p)) {
    if (std::isnan(p)) return kLdInf;
    return p > 0.0L ? kLdInf : -kLdMax;
  }
  if (p == 0.0L ? (a != 0.0L && b != 0.0L) : std::fabs(p) < kLdMin) {
    return lnext_up(p);
  }
  long double r = std::fma(a, b, -p);
  return r > 0.0L ? lnext_up(p) : p;
}

// Requires b != 0.
long double ldiv_down(long double a, long double b) {
  long double q = a / b;
  if (!std::isfinite(q)) {
    if (std::isnan(q)) return -kLdInf;
    return q < 0.0L ? -kLdInf : kLdMax;
  }
  if (q != 0.0L && std::fabs(q) < kLdMin) {
    return lnext_down(q);
  }
  long double r = std::fma(q, b, -a);  // q*b - a; true quotient = q - r/b
  bool true_below = (r > 0.0L) == (b > 0.0L);
  return (r != 0.0L && true_below) ? lnext_down(q) : q;
}

long double ldiv_up(long double a, long double b) {
  long double q = a / b;
  if (!std::isfinite(q)) {
    if (std::isnan(q)) return kLdInf;
    return q > 0.0L ? kLdInf : -kLdMax;
  }
  if (q != 0.0L && std::fabs(q) < kLdMin) {
    return lnext_up(q);
  }
  long double r = std::fma(q, b, -a);
  bool true_above = (r > 0.0L) != (b > 0.0L);
  return (r != 0.0L && true_above) ? lnext_up(q) : q;
}

// Requires a >= 0.
long double lsqrt_down(long double a) {
  long double s = std::sqrt(a);
  if (a != 0.0L && a < kLdMin) {
    return lnext_down(s);  // s*s subnormal: residual can underflow to zero
  }
  long double r = std::fma(s, s, -a);  // s^2 - a
  return r > 0.0L ? lnext_down(s) : s;
}

long double lsqrt_up(long double a) {
  long double s = std::sqrt(a);
  if (a != 0.0L && a < kLdMin) {
    return lnext_up(s);
  }
  long double r = std::fma(s, s, -a);
  return r < 0.0L ? lnext_up(s) : s;
}

struct LdInterval {
  long double lo = 0.0L;
  long double hi = 0.0L;
  bool contains_zero() const { return lo <= 0.0L && 0.0L <= hi; }
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  long double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
  long double mig() const {
    return contains_zero() ? 0.0L : std::min(std::fabs(lo), std::fabs(hi));
  }
  long double width() const { return hi - lo; }
};

LdInterval ld_point(long double v) { return {v, v}; }

LdInterval ld_add(const LdInterval& a, const LdInterval& b) {
  return {ladd_down(a.lo, b.lo), ladd_up(a.hi, b.hi)};
}

LdInterval ld_neg(const LdInterval& a) { return {-a.hi, -a.lo}; }

LdInterval ld_mul(const LdInterval& a, const LdInterval& b) {
  long double lo =
      std::min(std::min(lmul_down(a.lo, b.lo), lmul_down(a.lo, b.hi)),
               std::min(lmul_down(a.hi, b.lo), lmul_down(a.hi, b.hi)));
  long double hi =
      std::max(std::max(lmul_up(a.lo, b.lo), lmul_up(a.lo, b.hi)),
               std::max(lmul_up(a.hi, b.lo), lmul_up(a.hi, b.hi)));
  return {lo, hi};
}

LdInterval ld_div(const LdInterval& a, const LdInterval& b) {
  if (b.contains_zero()) {
    throw EnclosureDomainError("division by interval containing zero");
  }
  long double lo =
      std::min(std::min(ldiv_down(a.lo, b.lo), ldiv_down(a.lo, b.hi)),
               std::min(ldiv_down(a.hi, b.lo), ldiv_down(a.hi, b.hi)));
  long double hi =
      std::max(std::max(ldiv_up(a.lo, b.lo), ldiv_up(a.lo, b.hi)),
               std::max(ldiv_up(a.hi, b.lo), ldiv_up(a.hi, b.hi)));
  return {lo, hi};
}

LdInterval ld_pow_point(long double x, unsigned k) {
  LdInterval acc = ld_point(1.0L);
  LdInterval base = ld_point(x);
  while (k != 0) {
    if (k & 1u) acc = ld_mul(acc, base);
    k >>= 1u;
    if (k != 0) base = ld_mul(base, base);
  }
  return acc;
}

LdInterval ld_pow(const LdInterval& a, unsigned k) {
  if (k == 0) return ld_point(1.0L);
  if (k == 1) return a;
  if (k % 2 == 0) {
    LdInterval upper = ld_pow_point(a.mag(), k);
    long double lo = 0.0L;
    if (!a.contains_zero()) {
      lo = ld_pow_point(a.mig(), k).lo;
    }
    return {lo, upper.hi};
  }
  return {ld_pow_point(a.lo, k).lo, ld_pow_point(a.hi, k).hi};
}

LdInterval ld_sqrt(const LdInterval& a) {
  if (a.lo < 0.0L) {
    throw EnclosureDomainError("sqrt over interval dipping below zero");
  }
  return {lsqrt_down(a.lo), lsqrt_up(a.hi)};
}

LdInterval ld_exp(const LdInterval& a) {
  long double lo = lnudge_down(std::exp(a.lo), kLibmUlps);
  long double hi = lnudge_up(std::exp(a.hi), kLibmUlps);
  if (std::isnan(hi)) hi = kLdInf;
  return {std::max(0.0L, lo), hi};
}

LdInterval ld_log(const LdInterval& a) {
  if (a.lo <= 0.0L) {
    throw EnclosureDomainError("log over interval touching nonpositive values");
  }
  return {lnudge_down(std::log(a.lo), kLibmUlps),
          lnudge_up(std::log(a.hi), kLibmUlps)};
}

// Point enclosures stay thin, so sin/cos need no phase tracking: over a
// width-w interval an interior extremum deviates from the endpoint values by
// at most w^2/2, covered by a w^2 guard. Anything wider than 1e-6 falls back
// to [-1, 1].
LdInterval ld_sin(const LdInterval& a) {
  if (!a.finite() || a.mag() > 1e8L || a.width() > 1e-6L) {
    return {-1.0L, 1.0L};
  }
  long double s0 = std::sin(a.lo);
  long double s1 = std::sin(a.hi);
  long double guard = a.width() * a.width();
  long double lo = lnudge_down(std::min(s0, s1) - guard, kLibmUlps);
  long double hi = lnudge_up(std::max(s0, s1) + guard, kLibmUlps);
  return {std::max(-1.0L, lo), std::min(1.0L, hi)};
}

LdInterval ld_cos(const LdInterval& a) {
  if (!a.finite() || a.mag() > 1e8L || a.width() > 1e-6L) {
    return {-1.0L, 1.0L};
  }
  long double c0 = std::cos(a.lo);
  long double c1 = std::cos(a.hi);
  long double guard = a.width() * a.width();
  long double lo = lnudge_down(std::min(c0, c1) - guard, kLibmUlps);
  long double hi = lnudge_up(std::max(c0, c1) + guard, kLibmUlps);
  return {std::max(-1.0L, lo), std::min(1.0L, hi)};
}

template <class Lookup>
LdInterval enclose_rec_ld(const Expr& e, const Lookup& lookup) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      return ld_point(e.constant_value());
    case K::Variable:
      return lookup(e.variable_index());
    case K::Sum: {
      LdInterval acc = ld_point(0.0L);
      for (const Expr& c : e.children()) {
        acc = ld_add(acc, enclose_rec_ld(c, lookup));
      }
      return acc;
    }
    case K::Product: {
      LdInterval acc = ld_point(1.0L);
      for (const Expr& c : e.children()) {
        acc = ld_mul(acc, enclose_rec_ld(c, lookup));
      }
      return acc;
    }
    case K::Negate:
      return ld_neg(enclose_rec_ld(e.children().front(), lookup));
    case K::Quotient:
      return ld_div(enclose_rec_ld(e.children()[0], lookup),
                    enclose_rec_ld(e.children()[1], lookup));
    case K::Power:
      return ld_pow(enclose_rec_ld(e.children().front(), lookup),
                    e.exponent());
    case K::Sin:
      return ld_sin(enclose_rec_ld(e.children().front(), lookup));
    case K::Cos:
      return ld_cos(enclose_rec_ld(e.children().front(), lookup));
    case K::Exp:
      return ld_exp(enclose_rec_ld(e.children().front(), lookup));
    case K::Log:
      return ld_log(enclose_rec_ld(e.children().front(), lookup));
    case K::Sqrt:
      return ld_sqrt(enclose_rec_ld(e.children().front(), lookup));
  }
  throw std::logic_error("unhandled expression kind in enclose");
}

}  // namespace

Interval enclose_point_sharp(const Expr& e, std::span<const double> point) {
  auto lookup = [point](int i) -> LdInterval {
    if (i < 0 || static_cast<std::size_t>(i) >= point.size()) {
      throw EnclosureDomainError("variable index outside point dimension");
    }
    return ld_point(point[static_cast<std::size_t>(i)]);
  };
  LdInterval r = enclose_rec_ld(e, lookup);
  // The extended-precision endpoints are already outward-rounded, so the
  // narrowing here needs only exact directed conversion — no guard band.
  // This keeps exactly representable results exact.
  Interval out;
  out.lo = static_cast<double>(r.lo);
  if (static_cast<long double>(out.lo) > r.lo) out.lo = next_down(out.lo);
  out.hi = static_cast<double>(r.hi);
  if (static_cast<long double>(out.hi) < r.hi) out.hi = next_up(out.hi);
  return out;
}

namespace {

// Apply fn to d bisected refine_depth times along every axis and return the
// max of the results. refine_depth 0 evaluates fn(d) directly.
template <class Fn>
double refined_max(const BoxDomain& d, int refine_depth, const Fn& fn) {
  if (refine_depth <= 0) return fn(d);
  double result = 0.0;
  BoxDomain piece = d;
  int n = d.dim();
  // Iterate the 2^(n*refine_depth) grid of sub-boxes axis by axis.
  std::vector<int> counts(static_cast<std::size_t>(n), 1 << refine_depth);
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    for (int a = 0; a < n; ++a) {
      double lo = d.lower[a];
      double hi = d.upper[a];
      double step = (hi - lo) / counts[a];
      double plo = lo + idx[a] * step;
      double phi = (idx[a] + 1 == counts[a]) ? hi : lo + (idx[a] + 1) * step;
      // Guard against rounding gaps between neighboring pieces: widen by one
      // step cell each side never hurts soundness for a max of sups, but we
      // must not *shrink* coverage, so clamp to the parent box and rely on
      // plo/phi being monotone in idx.
      piece.lower[a] = std::max(lo, plo);
      piece.upper[a] = std::min(hi, std::max(phi, plo));
    }
    result = std::max(result, fn(piece));
    int a = 0;
    while (a < n && ++idx[a] == counts[a]) {
      idx[a] = 0;
      ++a;
    }
    if (a == n) break;
  }
  return result;
}

}  // namespace

double bound_grad_norm2(const FunctionSystem& fs, int i, const BoxDomain& d,
                        int refine_depth) {
  auto one = [&fs, i](const BoxDomain& piece) {
    Interval sum(0.0);
    for (int j = 0; j < fs.ambient_dim(); ++j) {
      Interval g = enclose(fs.gradient(i, j), piece);
      double m = g.abs_upper();
      sum = iadd(sum, imul(Interval(m), Interval(m)));
    }
    return isqrt(sum).hi;
  };
  return refined_max(d, refine_depth, one);
}

double bound_hess_norm2(const FunctionSystem& fs, int i, const BoxDomain& d,
                        int refine_depth) {
  auto one = [&fs, i](const BoxDomain& piece) {
    Interval sum(0.0);
    int n = fs.ambient_dim();
    for (int j = 0; j < n; ++j) {
      for (int l = j; l < n; ++l) {
        Interval h = enclose(fs.hessian(i, j, l), piece);
        double m = h.abs_upper();
        Interval sq = imul(Interval(m), Interval(m));
        if (l != j) sq = imul(Interval(2.0), sq);  // symmetric off-diagonal
        sum = iadd(sum, sq);
      }
    }
    return isqrt(sum).hi;
  };
  return refined_max(d, refine_depth, one);
}

}  // namespace reachcert
