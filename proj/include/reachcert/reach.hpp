// Reach lower bounds assembled from certified derivative constants.
//
// The reach of a submanifold M ⊂ ℝᴺ is the largest radius r such that every
// ambient point within distance r of M has a unique nearest point on M. It
// equals min{η, ρ}, where ρ bounds normal curvature radii and η is half the
// smallest bottleneck. Both branches are bounded from below here using only
// certified constants (gradient/Hessian bounds, Gram determinant bounds), and
// every arithmetic step rounds the final value downward.
#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reachcert {

// A nonnegative lower bound that may be infinite (flat manifolds have
// unbounded curvature radius). The sentinel is explicit: infinities never
// flow through arithmetic.
struct LowerBound {
  double value = 0.0;
  bool unbounded = false;

  static LowerBound finite(double v) { return LowerBound{v, false}; }
  static LowerBound infinite() { return LowerBound{0.0, true}; }
};

inline LowerBound min_bound(const LowerBound& a, const LowerBound& b) {
  if (a.unbounded) return b;
  if (b.unbounded) return a;
  return a.value <= b.value ? a : b;
}

struct ReachCertificate {
  LowerBound tau;               // reach lower bound: min of the two below
  LowerBound curvature_radius;  // ρ: normal curvature radius lower bound
  LowerBound bottleneck_half;   // η: half-bottleneck lower bound
  // Named constants consumed, in a stable order, for reporting.
  std::vector<std::pair<std::string, double>> inputs;
  // Free-text reference to the subdivision certificate consumed (path or
  // formula summary); empty when the constants were supplied directly.
  std::string provenance;
};

// Hypersurface path (one defining function).
//   c1: upper bound for the Hessian 2-norm on a convex set containing M.
//   c2: lower bound for |∇f|₁ on M.
// Produces ρ ≥ c2/(√N·c1), η ≥ c2/(2√N·c1), τ = min (both equal the η value).
// The 1-norm feeds in because |∇f|₂ ≥ |∇f|₁/√N; the conversion happens here,
// once. Throws std::invalid_argument on c1 ≤ 0 or c2 < 0.
ReachCertificate reach_lower_single(double c1, double c2, int ambient_dim);

// Unique symmetric-positive-definite square root of g⁻¹ for an SPD matrix g.
// Columns of the result turn a frame with Gram matrix g into an orthonormal
// frame. Throws std::invalid_argument when g is not SPD (checked via
// Cholesky).
Eigen::MatrixXd orthonormalize_gram(const Eigen::MatrixXd& g);

// Entrywise bound for √(g⁻¹) of a positive definite d×d matrix:
//   d^{2+(d-1)/4} · ‖g‖₁^{(d-1)/2} / det(g)^{1/2},   rounded up.
// ‖g‖₁ is the max-column-sum operator norm. Throws on det_g ≤ 0.
double sqrt_inv_entry_bound(double norm1_g, double det_g, int d);

// Curvature bound for a k-function system: |II(v,w)| for unit tangents is at
// most
//   k^{3+(k-1)/4} · ‖g‖₁^{(k-1)/2} / det(g)^{1/2} · Σᵢ hess_bounds[i],
// rounded up, where g is the Gram matrix of the gradients. Returns the bound
// κ_max (0 for an affine system, whose curvature radius is unbounded).
// Throws on det_g ≤ 0 or k < 1.
double second_ff_bound_system(double norm1_g, double det_g, int k,
                              const std::vector<double>& hess_bounds);

// Norm-equivalence constant between ambient and frame coordinates:
//   C₄ = N^{4+(N-1)/4} · ‖g‖₁^{(N-1)/2} / det(g)^{1/2},   rounded up.
// Throws on det_g ≤ 0.
double norm_equiv_C4(double norm1_g, double det_g, int ambient_dim);

// Smallest-bottleneck lower bound for a k-function system:
//   λ ≥ 1 / (2·C₄·k·K·(m·C₄·k + 1)),   rounded down,
// where K bounds each Hessian 2-norm and m bounds each gradient 2-norm from
// above. Throws when any input is nonpositive.
double bottleneck_bound_system(double c4, int k, double hess_upper,
                               double grad_upper);

// Inputs for the k-function reach bound. All constants hold uniformly over a
// region of M certified by a subdivision run:
//   gram_norm1_upper  (C₅): upper bound for ‖g‖₁,
//   det_gram_lower    (C₆): lower bound for det g  (must be > 0),
//   hess_upper        (C₇): per-function Hessian 2-norm upper bound (≥ 0),
//   grad_upper        (C₈): per-function gradient 2-norm upper bound (≥ 0).
struct SystemReachInputs {
  int ambient_dim = 0;
  int function_count = 0;
  double gram_norm1_upper = 0.0;
  double det_gram_lower = 0.0;
  double hess_upper = 0.0;
  double grad_upper = 0.0;
};

// k-function reach bound:
//   τ ≥ min{ k^{-4-(k-1)/4}·C₆^{1/2}/(C₅^{(k-1)/2}·C₇),
//            (1/2)·1/(2·k·C₇·C₄·(C₈·C₄·k+1)) }
// with C₄ = norm_equiv_C4(C₅, C₆, N); each branch rounded down. hess_upper=0
// (affine system) yields the unbounded sentinel in both branches. Throws on
// det_gram_lower ≤ 0 or other negative/invalid inputs.
ReachCertificate reach_lower_system(const SystemReachInputs& in);

}  // namespace reachcert
