#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachcert/expr.hpp"
#include "reachcert/interval.hpp"

namespace reachcert {

// Outcome of classifying one box against the certified tests.
enum class Classification : std::uint8_t {
  CaseOne,  // the function (some function) is bounded away from zero on the box
  CaseTwo,  // the nondegeneracy witness is bounded away from zero on the box
  Split,    // neither test certified; subdivide further
};

struct BoxRegion {
  BoxDomain domain;
  int depth = 0;
  Classification cls = Classification::Split;
};

enum class BoundMode : std::uint8_t {
  Global,  // one M2/M3 pair over the root box
  PerBox,  // M2/M3 recomputed over each examined box
};

enum class SplitStrategy : std::uint8_t {
  FullGrid,       // split every axis, 2^N children
  BisectLongest,  // bisect the longest axis (ties -> lowest index)
};

enum class CertificateMode : std::uint8_t { SingleFunction, System };

struct SubdivisionConfig {
  int depth_cap = 40;
  BoundMode bound_mode = BoundMode::Global;
  SplitStrategy split = SplitStrategy::FullGrid;
  int workers = 1;
  std::optional<double> m2_override;  // certified by the caller
  std::optional<double> m3_override;
  std::uint64_t step_limit = 50'000'000;  // safety valve, not a paper knob
  // Called with (boxes processed so far, current frontier size) roughly every
  // 10^4 boxes.
  std::function<void(std::uint64_t, std::size_t)> heartbeat;
};

struct SubdivisionStats {
  std::uint64_t steps = 0;  // boxes popped and classified (or split)
  int max_depth = 0;
  double wall_seconds = 0.0;  // not serialized: certificates stay byte-stable
};

// Result of a finished subdivision. Terminal boxes are canonically sorted by
// lexicographic corner order. The zero set is contained in the union of the
// CaseTwo boxes; every CaseOne box is certified zero-free.
//
// Bound fields (all rounded toward the safe side):
//   grad_l1_lower        Single mode: global bound mode uses the smallest
//                        terminal side length eps_min in M3*N^(3/2)*eps_min/2;
//                        per-box mode reports the min over CaseTwo boxes of
//                        the per-box right-hand side.
//   grad_l1_lower_case_two  min over CaseTwo boxes of the per-box right-hand
//                        side (coincides with grad_l1_lower in per-box mode);
//                        the sharpest certified |grad f|_1 bound on the
//                        CaseTwo union, which is what downstream reach
//                        computations consume.
//   off_zero_lower       certified lower bound for |f| on the CaseOne union
//                        (max_j |f_j| in System mode).
//   det_g_lower…         System-mode analogues for |det g|.
// When no CaseTwo box exists the zero set is empty: empty_manifold is set and
// the gradient-side bounds hold vacuously (serialized as "inf").
struct SubdivisionCertificate {
  CertificateMode mode = CertificateMode::SingleFunction;
  int ambient_dim = 0;
  int function_count = 1;
  double half_width = 0.0;  // root box is [-half_width, half_width]^N
  double m2 = 0.0;          // global bounds (overrides echoed); 0 in per-box mode
  double m3 = 0.0;
  BoundMode bound_mode = BoundMode::Global;
  SplitStrategy split = SplitStrategy::FullGrid;
  std::vector<std::string> formulas;

  std::vector<BoxRegion> case_one;
  std::vector<BoxRegion> case_two;

  double epsilon_min = 0.0;  // smallest side length among all terminal boxes
  double grad_l1_lower = 0.0;
  double grad_l1_lower_case_two = 0.0;
  double off_zero_lower = 0.0;
  double det_g_lower = 0.0;
  double det_g_lower_case_two = 0.0;
  bool empty_manifold = false;

  SubdivisionStats stats;
};

// Raised when boxes remain unresolved at the configured depth cap; carries
// the deepest unresolved boxes for diagnostics.
class DepthCapExceeded : public std::runtime_error {
 public:
  DepthCapExceeded(int depth_cap, std::uint64_t steps,
                   std::vector<BoxRegion> unresolved);
  int depth_cap() const { return depth_cap_; }
  std::uint64_t steps() const { return steps_; }
  const std::vector<BoxRegion>& unresolved() const { return unresolved_; }

 private:
  int depth_cap_;
  std::uint64_t steps_;
  std::vector<BoxRegion> unresolved_;
};

class StepLimitExceeded : public std::runtime_error {
 public:
  explicit StepLimitExceeded(std::uint64_t steps);
};

// Certified classification of one box for a single function (fs.size()==1):
//   CaseOne iff the interval value of |f(m)| certifiably exceeds 2*D*M2,
//   CaseTwo iff the interval value of |grad f(m)|_1 certifiably exceeds
//           2*N*D*M3,
// where m is the box midpoint and D a certified upper bound on the half
// diagonal (for a cube of side eps these are the sqrt(N)*eps*M2 and
// N^(3/2)*eps*M3 thresholds). Split otherwise: failing both certified tests
// never misclassifies.
Classification classify_single(const FunctionSystem& fs, const BoxRegion& box,
                               double m2, double m3);

// System version: CaseOne iff max_j |f_j(m)| certifiably exceeds 2*D*M2;
// CaseTwo iff |det g(m)| certifiably exceeds 4*sqrt(N)*D*k!*M2^(2k-1)*M3,
// with g the Gram matrix of the gradients at m (for a cube of side eps this
// is the 2*N*eps*k!*M2^(2k-1)*M3 threshold).
Classification classify_system(const FunctionSystem& fs, const BoxRegion& box,
                               double m2, double m3);

// Run the subdivision over the root box [-half_width, half_width]^N until
// every box is classified. Deterministic for any worker count.
SubdivisionCertificate run_subdivision(const FunctionSystem& fs,
                                       double half_width,
                                       const SubdivisionConfig& config = {});

struct SampleReport {
  std::size_t requested = 0;
  std::size_t landed = 0;  // samples Newton-refined onto the zero set
  double min_witness = 0.0;  // min |grad f|_1 (single) or min |det g| (system)
  double certified_bound = 0.0;
  bool consistent = true;  // min_witness >= certified_bound (vacuous if empty)
  bool sampling_failed = false;  // fewer than requested samples landed
};

// Diagnostic (not part of the certificate): refine n random samples onto the
// zero set and check the certified bound from below. Deterministic per seed.
SampleReport sanity_check_sample(const FunctionSystem& fs,
                                 const SubdivisionCertificate& cert,
                                 std::size_t n, std::uint64_t seed = 20240701);

// Gauss-Newton projection of a point onto the zero set; returns the refined
// point when the residual drops below `tol` within `max_iter` iterations.
std::optional<std::vector<double>> newton_project(const FunctionSystem& fs,
                                                  std::vector<double> start,
                                                  double tol = 1e-12,
                                                  int max_iter = 80);

// Canonical ordering: lexicographic on the lower corner, then the upper.
bool box_before(const BoxDomain& a, const BoxDomain& b);

}  // namespace reachcert
