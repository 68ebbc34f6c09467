#include "reachcert/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reachcert/apps.hpp"
#include "reachcert/interval.hpp"

namespace reachcert {

namespace {

// Convex hull (as a box) of the near-zero region: the reach constants need
// derivative bounds on a convex set containing the manifold, and straight
// segments between manifold points stay inside this hull.
std::optional<BoxDomain> case_two_hull(const SubdivisionCertificate& cert) {
  if (cert.case_two.empty()) return std::nullopt;
  BoxDomain hull = cert.case_two.front().domain;
  for (const BoxRegion& b : cert.case_two) {
    for (int a = 0; a < cert.ambient_dim; ++a) {
      hull.lower[a] = std::min(hull.lower[a], b.domain.lower[a]);
      hull.upper[a] = std::max(hull.upper[a], b.domain.upper[a]);
    }
  }
  return hull;
}

constexpr int kHullRefineDepth = 3;

}  // namespace

PipelineResult run_pipeline(
    const ProblemConfig& config,
    const std::function<void(std::uint64_t, std::size_t)>& heartbeat) {
  PipelineResult result;
  Report& rep = result.report;

  std::vector<Expr> parsed;
  for (const std::string& text : config.functions) {
    parsed.push_back(parse_formula(text, config.dimension));
  }
  FunctionSystem fs(config.dimension, parsed);
  const bool single = fs.size() == 1;

  rep.add_int("config.dimension", config.dimension);
  rep.add_int("config.functions", fs.size());
  rep.add_double("config.half_width", config.half_width);
  rep.add("config.bound_mode",
          config.bound_mode == BoundMode::Global ? "global" : "per-box");
  rep.add("config.strategy", config.strategy == SplitStrategy::FullGrid
                                 ? "full-split"
                                 : "bisect-longest");

  if (!config.pipeline.grad_bound) return result;

  SubdivisionConfig sub;
  sub.depth_cap = config.depth_cap;
  sub.bound_mode = config.bound_mode;
  sub.split = config.strategy;
  sub.workers = config.workers;
  sub.m2_override = config.m2;
  sub.m3_override = config.m3;
  sub.heartbeat = heartbeat;

  SubdivisionCertificate cert =
      run_subdivision(fs, config.half_width, sub);
  result.certificate = cert;

  rep.add_uint("grad.steps", cert.stats.steps);
  rep.add_int("grad.max_depth", cert.stats.max_depth);
  rep.add_double("grad.epsilon_min", cert.epsilon_min);
  rep.add_uint("grad.case_one_count", cert.case_one.size());
  rep.add_uint("grad.case_two_count", cert.case_two.size());
  rep.add_int("grad.empty_manifold", cert.empty_manifold ? 1 : 0);
  if (cert.bound_mode == BoundMode::Global) {
    rep.add_double("grad.m2", cert.m2);
    rep.add_double("grad.m3", cert.m3);
  }
  if (single) {
    rep.add_double("grad.bound", cert.grad_l1_lower);
    rep.add_double("grad.bound_case_two", cert.grad_l1_lower_case_two);
  } else {
    rep.add_double("grad.det_bound", cert.det_g_lower);
    rep.add_double("grad.det_bound_case_two", cert.det_g_lower_case_two);
  }
  rep.add_double("grad.off_zero", cert.off_zero_lower);

  if (!config.pipeline.reach) return result;

  ReachCertificate reach;
  if (cert.empty_manifold) {
    reach.tau = LowerBound::infinite();
    reach.curvature_radius = LowerBound::infinite();
    reach.bottleneck_half = LowerBound::infinite();
    reach.provenance = "empty zero set";
    rep.add_int("reach.empty_manifold", 1);
  } else if (single) {
    double c2 = std::max(cert.grad_l1_lower, cert.grad_l1_lower_case_two);
    std::optional<BoxDomain> hull = case_two_hull(cert);
    double c1 = bound_hess_norm2(fs, 0, *hull, kHullRefineDepth);
    if (config.m3 && *config.m3 < c1) c1 = *config.m3;
    reach = reach_lower_single(c1, c2, config.dimension);
    rep.add_double("reach.c1", c1);
    rep.add_double("reach.c2", c2);
  } else {
    std::optional<BoxDomain> hull = case_two_hull(cert);
    const int k = fs.size();
    const int n = config.dimension;
    // Gram-matrix enclosure over the hull, then its max column sum.
    std::vector<std::vector<Interval>> grads(
        k, std::vector<Interval>(static_cast<std::size_t>(n)));
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < n; ++j) {
        grads[i][j] = enclose(fs.gradient(i, j), *hull);
      }
    }
    double norm1 = 0.0;
    for (int j = 0; j < k; ++j) {
      Interval col(0.0);
      for (int i = 0; i < k; ++i) {
        Interval dot(0.0);
        for (int t = 0; t < n; ++t) {
          dot = iadd(dot, imul(grads[i][t], grads[j][t]));
        }
        col = iadd(col, iabs(dot));
      }
      norm1 = std::max(norm1, col.hi);
    }
    double hess = 0.0;
    double grad2 = 0.0;
    for (int i = 0; i < k; ++i) {
      hess = std::max(hess, bound_hess_norm2(fs, i, *hull, kHullRefineDepth));
      grad2 =
          std::max(grad2, bound_grad_norm2(fs, i, *hull, kHullRefineDepth));
    }
    if (config.m3 && *config.m3 < hess) hess = *config.m3;
    if (config.m2 && *config.m2 < grad2) grad2 = *config.m2;
    SystemReachInputs in;
    in.ambient_dim = n;
    in.function_count = k;
    in.gram_norm1_upper = norm1;
    in.det_gram_lower = std::max(cert.det_g_lower, cert.det_g_lower_case_two);
    in.hess_upper = hess;
    in.grad_upper = grad2;
    reach = reach_lower_system(in);
  }
  for (const auto& [key, value] : reach.inputs) {
    rep.add_double("reach.input." + key, value);
  }
  if (reach.tau.unbounded) {
    rep.add("reach.tau", "unbounded");
  } else {
    rep.add_double("reach.tau", reach.tau.value);
    rep.add_double("reach.curvature_radius", reach.curvature_radius.value);
    rep.add_double("reach.bottleneck_half", reach.bottleneck_half.value);
  }
  result.reach = reach;

  if (config.pipeline.homology) {
    const double l = config.homology_half_width.value_or(config.half_width);
    SelectionOptions opts;
    opts.workers = config.workers;
    opts.conservative = config.homology_conservative;
    double delta;
    if (reach.tau.unbounded) {
      // Any cell size is admissible (the zero set is empty or flat); pick a
      // benign default resolution.
      opts.skip_reach_check = true;
      delta = config.homology_delta.value_or(l / 64.0);
    } else {
      opts.tau_lower = reach.tau.value;
      delta = config.homology_delta.value_or(
          rounding::chop_down(static_cast<long double>(reach.tau.value) /
                              2.37L));
    }
    SelectionGrid grid = select_boxes(fs.function(0), l, delta, opts);
    BettiNumbers b = betti(grid);
    rep.add_double("homology.half_width", l);
    rep.add_double("homology.delta", grid.delta);
    rep.add_int("homology.cells_per_axis", grid.cells);
    rep.add_uint("homology.selected", grid.selected_count());
    rep.add_int("homology.certified", grid.certified ? 1 : 0);
    rep.add_uint("homology.b0", b.b0);
    rep.add_uint("homology.b1", b.b1);
    result.grid = std::move(grid);
  }

  if (config.pipeline.eigenvalue) {
    if (reach.tau.unbounded) {
      throw std::invalid_argument(
          "eigenvalue stage needs a finite reach bound");
    }
    EigenvalueReport er =
        eigenvalue_report(*config.eigenvalue_dim, config.dimension,
                          *config.eigenvalue_radius, reach.tau.value);
    rep.add_double("eigen.ball_radius", er.ball_radius);
    rep.add_int("eigen.manifold_dim", er.manifold_dim);
    rep.add_uint("eigen.nu", er.nu);
    rep.add_int("eigen.covering_outside_theorem_range",
                er.covering_outside_theorem_range ? 1 : 0);
    rep.add_double("eigen.diameter_upper", er.diameter_upper);
    rep.add_double("eigen.ricci_xi", er.ricci_xi);
    rep.add_double("eigen.ricci_lower_coeff", er.ricci_lower_coeff);
    rep.add_double("eigen.log_lambda1_lower", er.log_lambda1_lower);
  }

  if (config.pipeline.deform) {
    DeformationMargin margin = deformation_margin(cert);
    rep.add_double("deform.delta_min", margin.delta_min);
    rep.add_double("deform.xi_min", margin.xi_min);
  }

  return result;
}

}  // namespace reachcert
