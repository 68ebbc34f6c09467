#include "reachcert/apps.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "reachcert/interval.hpp"

namespace reachcert {

namespace {
using rounding::chop_down;
using rounding::chop_up;

long double theta(long double n) {
  return n * logl(n) + n * logl(logl(n)) + 5.0L * n;
}
}  // namespace

double intrinsic_from_extrinsic_sqrt(double tau, double d) {
  if (!(tau > 0.0)) throw std::invalid_argument("reach bound must be positive");
  if (!(d >= 0.0)) throw std::invalid_argument("distance must be nonnegative");
  if (d > tau / 2.0) {
    throw std::invalid_argument(
        "distance exceeds tau/2: the square-root comparison does not apply");
  }
  return chop_up(sqrtl(2.0L * static_cast<long double>(tau) *
                       static_cast<long double>(d)));
}

double intrinsic_from_extrinsic_linear(double tau, double d) {
  if (!(tau > 0.0)) throw std::invalid_argument("reach bound must be positive");
  if (!(d >= 0.0)) throw std::invalid_argument("distance must be nonnegative");
  if (!(d < tau / 2.0)) {
    throw std::invalid_argument(
        "distance must be strictly below tau/2 for the linear comparison");
  }
  return chop_up(2.0L * static_cast<long double>(d));
}

CoveringNumber covering_number(double t, int ambient_dim) {
  if (!(t > 0.5) || !std::isfinite(t)) {
    throw std::invalid_argument("ball radius ratio must exceed 1/2");
  }
  if (ambient_dim < 2) {
    throw std::invalid_argument("ambient dimension must be at least 2");
  }
  const long double n = ambient_dim;
  const long double tl = t;
  const long double e = expl(1.0L);
  CoveringNumber out;
  long double v;
  if (ambient_dim < 3) {
    // Case analysis is stated for N ≥ 3; evaluate the T ≥ N/2 branch anyway
    // and flag the result.
    out.outside_theorem_range = true;
    v = e * theta(n) * powl(2.0L * tl, n);
  } else if (tl >= n / 2.0L) {
    v = e * theta(n) * powl(2.0L * tl, n);
  } else if (tl >= n / (2.0L * logl(n))) {
    v = n * theta(n) * powl(2.0L * tl, n);
  } else if (ambient_dim >= 9) {
    v = 4.0L * e * powl(2.0L * tl, n) * n * sqrtl(n) / (logl(n) - 2.0L) *
        (n * logl(n) + n * logl(logl(n)) + n * logl(2.0L * tl) +
         0.5L * logl(144.0L * n));
  } else {
    throw std::invalid_argument(
        "no covering-number case applies: need T >= N/(2 ln N) or N >= 9");
  }
  long double up = ceill(v + fabsl(v) * 2e-18L);
  if (!(up >= 2.0L)) {
    throw std::logic_error("covering bound below its own lower bound of 2");
  }
  if (up > 9.2e18L) {
    throw std::overflow_error("covering number exceeds 64-bit range");
  }
  out.value = static_cast<std::uint64_t>(up);
  return out;
}

DiameterBound diameter_upper(double ball_radius, double tau,
                             int ambient_dim) {
  if (!(ball_radius > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("radius and reach bound must be positive");
  }
  if (ambient_dim < 2) {
    throw std::invalid_argument("ambient dimension must be at least 2");
  }
  DiameterBound out;
  long double t = static_cast<long double>(ball_radius) /
                  static_cast<long double>(tau);
  if (!(t > 0.5L)) {
    // Manifold small relative to its reach: the covering theorem needs
    // T > 1/2. Report the bounding-box diagonal instead (extrinsic-only).
    out.trivial_fallback = true;
    out.value = chop_up(2.0L * sqrtl(static_cast<long double>(ambient_dim)) *
                        static_cast<long double>(ball_radius));
    return out;
  }
  CoveringNumber nu = covering_number(chop_up(t), ambient_dim);
  out.nu = nu.value;
  out.covering_outside_theorem_range = nu.outside_theorem_range;
  out.value = chop_up(2.0L * (static_cast<long double>(nu.value) + 1.0L) *
                      static_cast<long double>(tau));
  return out;
}

RicciBound ricci_lower(int manifold_dim, const LowerBound& tau) {
  if (manifold_dim < 1) {
    throw std::invalid_argument("manifold dimension must be at least 1");
  }
  RicciBound out;
  if (tau.unbounded) {
    return out;  // flat: curvature terms vanish
  }
  if (!(tau.value > 0.0)) {
    throw std::invalid_argument("reach bound must be positive");
  }
  long double t = tau.value;
  out.xi = chop_down(-4.5L / (t * t));
  out.coeff = chop_down(static_cast<long double>(manifold_dim - 1) *
                        static_cast<long double>(out.xi));
  return out;
}

double lambda1_lower_log(int manifold_dim, double diameter, double xi) {
  if (manifold_dim < 2) {
    throw std::invalid_argument(
        "eigenvalue bound needs manifold dimension at least 2");
  }
  if (!(diameter > 0.0) || !std::isfinite(diameter)) {
    throw std::invalid_argument("diameter bound must be positive and finite");
  }
  if (xi > 0.0) {
    throw std::invalid_argument("ricci constant must be nonpositive");
  }
  const long double n1 = manifold_dim - 1;
  const long double d = diameter;
  const long double x = xi;
  long double root = sqrtl(1.0L - 4.0L * n1 * n1 * d * d * x);
  long double v = -(1.0L + root) - logl(2.0L * n1 * d * d);
  return chop_down(v);
}

EigenvalueReport eigenvalue_report(int manifold_dim, int ambient_dim,
                                   double ball_radius, double tau_lower) {
  if (!(tau_lower > 0.0) || !(ball_radius > 0.0)) {
    throw std::invalid_argument("radius and reach bound must be positive");
  }
  EigenvalueReport rep;
  rep.manifold_dim = manifold_dim;
  rep.ambient_dim = ambient_dim;
  rep.ball_radius = ball_radius;
  rep.tau_lower = tau_lower;
  DiameterBound diam = diameter_upper(ball_radius, tau_lower, ambient_dim);
  if (diam.trivial_fallback) {
    throw std::invalid_argument(
        "K/tau <= 1/2: the covering-based diameter path does not apply");
  }
  rep.nu = diam.nu;
  rep.diameter_upper = diam.value;
  rep.covering_outside_theorem_range = diam.covering_outside_theorem_range;
  RicciBound ricci =
      ricci_lower(manifold_dim, LowerBound::finite(tau_lower));
  rep.ricci_xi = ricci.xi;
  rep.ricci_lower_coeff = ricci.coeff;
  rep.log_lambda1_lower =
      lambda1_lower_log(manifold_dim, diam.value, ricci.xi);
  return rep;
}

DeformationMargin deformation_margin(const SubdivisionCertificate& cert) {
  if (cert.mode != CertificateMode::SingleFunction) {
    throw std::invalid_argument(
        "deformation margins are defined for single-function certificates");
  }
  if (cert.empty_manifold) {
    throw std::invalid_argument(
        "certificate proves the zero set is empty: nothing to deform");
  }
  if (!std::isfinite(cert.off_zero_lower)) {
    throw std::invalid_argument(
        "certificate has no off-zero region: margin undefined");
  }
  DeformationMargin out;
  out.delta_min = chop_down(
      static_cast<long double>(cert.grad_l1_lower) /
      sqrtl(static_cast<long double>(cert.ambient_dim)));
  out.xi_min = cert.off_zero_lower;
  return out;
}

}  // namespace reachcert
