// Downstream certified quantities: intrinsic/extrinsic distance comparison,
// covering numbers, intrinsic diameter, Ricci and first-eigenvalue bounds,
// and smooth-deformation margins.
#pragma once

#include <cstdint>

#include "reachcert/reach.hpp"
#include "reachcert/subdivide.hpp"

namespace reachcert {

// Intrinsic distance bound d_M(p,q) ≤ √(2·tau·d) for extrinsic distance
// d = |p-q| ≤ tau/2, rounded up. Throws when d < 0 or d > tau/2.
double intrinsic_from_extrinsic_sqrt(double tau, double d);

// Intrinsic distance bound d_M(p,q) ≤ 2d for d < tau/2 strictly.
// Throws on hypothesis violation.
double intrinsic_from_extrinsic_linear(double tau, double d);

struct CoveringNumber {
  std::uint64_t value = 0;
  // The case analysis is stated for ambient dimension ≥ 3; for N = 2 the
  // T ≥ N/2 branch formula is evaluated anyway and this flag is set.
  bool outside_theorem_range = false;
};

// Upper bound for the minimal number of closed radius-1/2 balls covering a
// closed ball of radius T in ℝᴺ, with ϑ_N = N·ln N + N·ln(ln N) + 5N:
//   T ≥ N/2:                ⌈e·ϑ_N·(2T)^N⌉
//   N/(2 ln N) ≤ T < N/2:   ⌈N·ϑ_N·(2T)^N⌉
//   N ≥ 9, 1/2 < T < N/(2 ln N):
//     ⌈4e(2T)^N·N^{3/2}/(ln N − 2)·(N ln N + N ln ln N + N ln(2T)
//        + (1/2)ln(144N))⌉
// Throws on T ≤ 1/2 and on (T, N) combinations no case covers.
CoveringNumber covering_number(double t, int ambient_dim);

struct DiameterBound {
  double value = 0.0;
  std::uint64_t nu = 0;  // covering number used (0 for the trivial fallback)
  // Set when T = K/tau ≤ 1/2: value is the bounding-box diagonal 2·√N·K,
  // an extrinsic-only stopgap outside the covering argument.
  bool trivial_fallback = false;
  bool covering_outside_theorem_range = false;
};

// Intrinsic diameter upper bound 2·(ν_{K/tau,N}+1)·tau (rounded up) for a
// connected manifold inside the ball of radius K. Connectedness is the
// caller's assertion.
DiameterBound diameter_upper(double ball_radius, double tau, int ambient_dim);

struct RicciBound {
  double xi = 0.0;     // per-direction constant −(9/2)·tau⁻²
  double coeff = 0.0;  // assembled (n−1)·xi: Ric ≥ coeff·g
};

// Ricci curvature lower bound from a reach lower bound; the unbounded
// sentinel (flat manifold) yields zero. Throws on n < 1 or tau ≤ 0.
RicciBound ricci_lower(int manifold_dim, const LowerBound& tau);

// Natural log of the first nonzero Laplace eigenvalue bound
//   λ₁ ≥ exp(−(1+√(1−4(n−1)²d²ξ))) / (2(n−1)d²)
// for manifold dimension n ≥ 2, intrinsic diameter bound d > 0, Ricci
// constant ξ ≤ 0. Computed entirely in log space (the raw value can
// underflow any float format); rounded down. Throws on n < 2, d ≤ 0 or
// ξ > 0.
double lambda1_lower_log(int manifold_dim, double diameter, double xi);

struct EigenvalueReport {
  int manifold_dim = 0;  // n
  int ambient_dim = 0;   // N
  double ball_radius = 0.0;
  double tau_lower = 0.0;
  std::uint64_t nu = 0;
  double diameter_upper = 0.0;
  double ricci_xi = 0.0;
  double ricci_lower_coeff = 0.0;     // (n−1)·xi
  double log_lambda1_lower = 0.0;     // natural log of the λ₁ bound
  bool covering_outside_theorem_range = false;
};

// Full chain reach → covering → diameter → Ricci → λ₁ (log space). Requires
// ball_radius/tau_lower > 1/2 so the covering path applies; throws
// otherwise.
EigenvalueReport eigenvalue_report(int manifold_dim, int ambient_dim,
                                   double ball_radius, double tau_lower);

struct DeformationMargin {
  double delta_min = 0.0;  // min over the near-zero region of |∇f|₂
  double xi_min = 0.0;     // min over the rest of the box of |f|
};

// Extracts the perturbation margins guaranteeing that Z(f + εP) stays a
// smooth manifold for ε ∈ [0,1) whenever ‖P‖ ≤ xi_min off the certified
// region and ‖∇P‖ ≤ delta_min on it. Requires a single-function,
// non-empty-manifold certificate; throws otherwise.
DeformationMargin deformation_margin(const SubdivisionCertificate& cert);

}  // namespace reachcert
