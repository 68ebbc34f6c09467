#include "reachcert/subdivide.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "reachcert/parallel.hpp"

namespace reachcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using rounding::chop_down;

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Certified upper enclosure of the half diagonal of the box.
Interval half_diagonal(const BoxDomain& d) {
  Interval sum(0.0);
  for (int a = 0; a < d.dim(); ++a) {
    Interval side = isub(Interval(d.upper[a]), Interval(d.lower[a]));
    Interval half = imul(side, Interval(0.5));
    sum = iadd(sum, imul(half, half));
  }
  return isqrt(sum);
}

// Certified lower bound of the smallest side length.
double min_side_lower(const BoxDomain& d) {
  double m = kInf;
  for (int a = 0; a < d.dim(); ++a) {
    m = std::min(m, isub(Interval(d.upper[a]), Interval(d.lower[a])).lo);
  }
  return m;
}

struct ClassifyDetail {
  Classification cls = Classification::Split;
  // Certified per-box bound contribution: lower bound for |f| on the box
  // (CaseOne) or for the gradient-side witness on the box (CaseTwo).
  double contribution = 0.0;
};

ClassifyDetail classify_single_detail(const FunctionSystem& fs,
                                      const BoxRegion& box, double m2,
                                      double m3) {
  const int n = fs.ambient_dim();
  std::vector<double> m = box.domain.midpoint();
  Interval d_half = half_diagonal(box.domain);

  Interval f_m = enclose_point(fs.function(0), m);
  Interval off_zero = imul(d_half, Interval(m2));
  Interval rhs_one = imul(Interval(2.0), off_zero);
  if (f_m.abs_lower() > rhs_one.hi) {
    return {Classification::CaseOne, off_zero.lo};
  }

  Interval grad_l1(0.0);
  for (int j = 0; j < n; ++j) {
    grad_l1 = iadd(grad_l1, iabs(enclose_point(fs.gradient(0, j), m)));
  }
  Interval grad_margin =
      imul(Interval(static_cast<double>(n)), imul(d_half, Interval(m3)));
  Interval rhs_two = imul(Interval(2.0), grad_margin);
  if (grad_l1.lo > rhs_two.hi) {
    return {Classification::CaseTwo, grad_margin.lo};
  }
  return {Classification::Split, 0.0};
}

// Interval determinant by cofactor expansion (k <= 5) or LU with mignitude
// pivoting; a vanishing pivot yields an enclosure straddling zero, which can
// never trigger CaseTwo (sound).
Interval interval_det(std::vector<std::vector<Interval>> a) {
  const std::size_t k = a.size();
  if (k == 1) return a[0][0];
  if (k == 2) {
    return isub(imul(a[0][0], a[1][1]), imul(a[0][1], a[1][0]));
  }
  if (k <= 5) {
    Interval det(0.0);
    std::vector<std::vector<Interval>> minor(k - 1,
                                             std::vector<Interval>(k - 1));
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t r = 1; r < k; ++r) {
        std::size_t cc = 0;
        for (std::size_t c2 = 0; c2 < k; ++c2) {
          if (c2 == c) continue;
          minor[r - 1][cc++] = a[r][c2];
        }
      }
      Interval term = imul(a[0][c], interval_det(minor));
      det = (c % 2 == 0) ? iadd(det, term) : isub(det, term);
    }
    return det;
  }
  Interval det(1.0);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t pivot = c;
    double best = a[c][c].mig();
    for (std::size_t r = c + 1; r < k; ++r) {
      if (a[r][c].mig() > best) {
        best = a[r][c].mig();
        pivot = r;
      }
    }
    if (best == 0.0) {
      return Interval(-kInf, kInf);  // cannot certify a nonzero determinant
    }
    if (pivot != c) {
      std::swap(a[pivot], a[c]);
      det = ineg(det);
    }
    det = imul(det, a[c][c]);
    for (std::size_t r = c + 1; r < k; ++r) {
      Interval factor = idiv(a[r][c], a[c][c]);
      for (std::size_t c2 = c + 1; c2 < k; ++c2) {
        a[r][c2] = isub(a[r][c2], imul(factor, a[c][c2]));
      }
    }
  }
  return det;
}

ClassifyDetail classify_system_detail(const FunctionSystem& fs,
                                      const BoxRegion& box, double m2,
                                      double m3) {
  const int n = fs.ambient_dim();
  const int k = fs.size();
  std::vector<double> m = box.domain.midpoint();
  Interval d_half = half_diagonal(box.domain);

  Interval off_zero = imul(d_half, Interval(m2));
  Interval rhs_one = imul(Interval(2.0), off_zero);
  double best = 0.0;
  for (int i = 0; i < k; ++i) {
    best = std::max(best, enclose_point(fs.function(i), m).abs_lower());
  }
  if (best > rhs_one.hi) {
    return {Classification::CaseOne, off_zero.lo};
  }

  std::vector<std::vector<Interval>> grads(
      k, std::vector<Interval>(static_cast<std::size_t>(n)));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < n; ++j) {
      grads[i][j] = enclose_point(fs.gradient(i, j), m);
    }
  }
  std::vector<std::vector<Interval>> gram(k, std::vector<Interval>(k));
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      Interval s(0.0);
      for (int t = 0; t < n; ++t) {
        s = iadd(s, imul(grads[i][t], grads[j][t]));
      }
      gram[i][j] = s;
      gram[j][i] = s;
    }
  }
  Interval det = interval_det(gram);

  // Lipschitz-style bound for d(det g): 2*sqrt(N)*k!*M2^(2k-1)*M3.
  Interval l_det = imul(
      imul(Interval(2.0), isqrt(Interval(static_cast<double>(n)))),
      imul(Interval(factorial(k)),
           imul(point_pow(m2, static_cast<unsigned>(2 * k - 1)), Interval(m3))));
  Interval det_margin = imul(d_half, l_det);
  Interval rhs_two = imul(Interval(2.0), det_margin);
  if (det.abs_lower() > rhs_two.hi) {
    return {Classification::CaseTwo, det_margin.lo};
  }
  return {Classification::Split, 0.0};
}

}  // namespace

Classification classify_single(const FunctionSystem& fs, const BoxRegion& box,
                               double m2, double m3) {
  if (fs.size() != 1) {
    throw std::invalid_argument("classify_single expects a single function");
  }
  return classify_single_detail(fs, box, m2, m3).cls;
}

Classification classify_system(const FunctionSystem& fs, const BoxRegion& box,
                               double m2, double m3) {
  return classify_system_detail(fs, box, m2, m3).cls;
}

DepthCapExceeded::DepthCapExceeded(int depth_cap, std::uint64_t steps,
                                   std::vector<BoxRegion> unresolved)
    : std::runtime_error("subdivision hit depth cap " +
                         std::to_string(depth_cap) + " with " +
                         std::to_string(unresolved.size()) +
                         " unresolved boxes after " + std::to_string(steps) +
                         " steps"),
      depth_cap_(depth_cap),
      steps_(steps),
      unresolved_(std::move(unresolved)) {}

StepLimitExceeded::StepLimitExceeded(std::uint64_t steps)
    : std::runtime_error("subdivision exceeded the step limit (" +
                         std::to_string(steps) + " steps)") {}

bool box_before(const BoxDomain& a, const BoxDomain& b) {
  if (a.lower != b.lower) {
    return std::lexicographical_compare(a.lower.begin(), a.lower.end(),
                                        b.lower.begin(), b.lower.end());
  }
  return std::lexicographical_compare(a.upper.begin(), a.upper.end(),
                                      b.upper.begin(), b.upper.end());
}

SubdivisionCertificate run_subdivision(const FunctionSystem& fs,
                                       double half_width,
                                       const SubdivisionConfig& config) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("half width must be positive and finite");
  }
  if (config.depth_cap < 0) {
    throw std::invalid_argument("depth cap must be nonnegative");
  }
  const int n = fs.ambient_dim();
  const int k = fs.size();
  const bool single = (k == 1);
  const bool per_box = (config.bound_mode == BoundMode::PerBox);
  const int workers = std::max(1, config.workers);

  auto t0 = std::chrono::steady_clock::now();

  BoxDomain root = BoxDomain::cube(0.0, half_width, n);
  double m2_global = 0.0;
  double m3_global = 0.0;
  if (!per_box) {
    if (config.m2_override) {
      m2_global = *config.m2_override;
    } else {
      for (int i = 0; i < k; ++i) {
        m2_global = std::max(m2_global, bound_grad_norm2(fs, i, root));
      }
    }
    if (config.m3_override) {
      m3_global = *config.m3_override;
    } else {
      for (int i = 0; i < k; ++i) {
        m3_global = std::max(m3_global, bound_hess_norm2(fs, i, root));
      }
    }
    if (!(m2_global >= 0.0) || !(m3_global >= 0.0)) {
      throw std::invalid_argument("derivative bounds must be nonnegative");
    }
  }

  SubdivisionCertificate cert;
  cert.mode =
      single ? CertificateMode::SingleFunction : CertificateMode::System;
  cert.ambient_dim = n;
  cert.function_count = k;
  cert.half_width = half_width;
  cert.m2 = per_box ? 0.0 : m2_global;
  cert.m3 = per_box ? 0.0 : m3_global;
  cert.bound_mode = config.bound_mode;
  cert.split = config.split;
  for (const Expr& f : fs.functions()) {
    cert.formulas.push_back(to_formula(f));
  }

  struct Outcome {
    ClassifyDetail detail;
    double min_side = 0.0;
  };

  std::vector<BoxRegion> frontier;
  frontier.push_back(BoxRegion{root, 0, Classification::Split});
  std::vector<Outcome> outcomes;
  std::vector<BoxRegion> next_frontier;
  std::vector<BoxRegion> unresolved;

  double eps_min = kInf;
  double min_off_zero = kInf;
  double min_grad_side = kInf;  // per-box CaseTwo contributions
  std::uint64_t steps = 0;
  std::uint64_t next_heartbeat = 10'000;
  int max_depth = 0;

  auto classify_one = [&](const BoxRegion& box) -> Outcome {
    double m2 = m2_global;
    double m3 = m3_global;
    if (per_box) {
      m2 = 0.0;
      m3 = 0.0;
      for (int i = 0; i < k; ++i) {
        m2 = std::max(m2, bound_grad_norm2(fs, i, box.domain));
        m3 = std::max(m3, bound_hess_norm2(fs, i, box.domain));
      }
    }
    Outcome out;
    out.detail = single ? classify_single_detail(fs, box, m2, m3)
                        : classify_system_detail(fs, box, m2, m3);
    out.min_side = min_side_lower(box.domain);
    return out;
  };

  while (!frontier.empty()) {
    if (steps + frontier.size() > config.step_limit) {
      throw StepLimitExceeded(steps + frontier.size());
    }
    outcomes.assign(frontier.size(), Outcome{});
    parallel_for(
        frontier.size(), workers,
        [&](std::size_t i) { outcomes[i] = classify_one(frontier[i]); });

    next_frontier.clear();
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      BoxRegion& box = frontier[i];
      const Outcome& out = outcomes[i];
      max_depth = std::max(max_depth, box.depth);
      switch (out.detail.cls) {
        case Classification::CaseOne:
          eps_min = std::min(eps_min, out.min_side);
          min_off_zero = std::min(min_off_zero, out.detail.contribution);
          box.cls = Classification::CaseOne;
          cert.case_one.push_back(std::move(box));
          break;
        case Classification::CaseTwo:
          eps_min = std::min(eps_min, out.min_side);
          min_grad_side = std::min(min_grad_side, out.detail.contribution);
          box.cls = Classification::CaseTwo;
          cert.case_two.push_back(std::move(box));
          break;
        case Classification::Split: {
          if (box.depth >= config.depth_cap) {
            unresolved.push_back(std::move(box));
            break;
          }
          const BoxDomain& d = box.domain;
          bool splittable = true;
          std::vector<double> mid(static_cast<std::size_t>(n));
          for (int a = 0; a < n; ++a) {
            mid[a] = d.lower[a] + (d.upper[a] - d.lower[a]) / 2;
            if (!(mid[a] > d.lower[a] && mid[a] < d.upper[a])) {
              splittable = false;
            }
          }
          if (!splittable) {  // box thinner than representable midpoints
            unresolved.push_back(std::move(box));
            break;
          }
          if (config.split == SplitStrategy::FullGrid) {
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
              BoxRegion child;
              child.depth = box.depth + 1;
              child.domain.lower.resize(static_cast<std::size_t>(n));
              child.domain.upper.resize(static_cast<std::size_t>(n));
              for (int a = 0; a < n; ++a) {
                bool high = (mask >> (n - 1 - a)) & 1u;  // axis 0 most significant
                child.domain.lower[a] = high ? mid[a] : d.lower[a];
                child.domain.upper[a] = high ? d.upper[a] : mid[a];
              }
              next_frontier.push_back(std::move(child));
            }
          } else {
            int axis = 0;
            double best = -1.0;
            for (int a = 0; a < n; ++a) {
              double side = d.upper[a] - d.lower[a];
              if (side > best) {
                best = side;
                axis = a;
              }
            }
            for (int half = 0; half < 2; ++half) {
              BoxRegion child;
              child.depth = box.depth + 1;
              child.domain = d;
              if (half == 0) {
                child.domain.upper[axis] = mid[axis];
              } else {
                child.domain.lower[axis] = mid[axis];
              }
              next_frontier.push_back(std::move(child));
            }
          }
          break;
        }
      }
    }
    steps += frontier.size();
    if (config.heartbeat && steps >= next_heartbeat) {
      config.heartbeat(steps, next_frontier.size());
      while (next_heartbeat <= steps) next_heartbeat += 10'000;
    }
    frontier.swap(next_frontier);
  }

  auto t1 = std::chrono::steady_clock::now();
  cert.stats.steps = steps;
  cert.stats.max_depth = max_depth;
  cert.stats.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  if (!unresolved.empty()) {
    std::sort(unresolved.begin(), unresolved.end(),
              [](const BoxRegion& a, const BoxRegion& b) {
                if (a.depth != b.depth) return a.depth > b.depth;
                return box_before(a.domain, b.domain);
              });
    throw DepthCapExceeded(config.depth_cap, steps, std::move(unresolved));
  }

  auto canonical = [](const BoxRegion& a, const BoxRegion& b) {
    return box_before(a.domain, b.domain);
  };
  std::sort(cert.case_one.begin(), cert.case_one.end(), canonical);
  std::sort(cert.case_two.begin(), cert.case_two.end(), canonical);

  cert.epsilon_min = eps_min;
  cert.empty_manifold = cert.case_two.empty();

  const long double nl = static_cast<long double>(n);
  const long double eps = static_cast<long double>(eps_min);
  if (single) {
    if (cert.empty_manifold) {
      cert.grad_l1_lower = kInf;
      cert.grad_l1_lower_case_two = kInf;
    } else if (per_box) {
      cert.grad_l1_lower = min_grad_side;
      cert.grad_l1_lower_case_two = min_grad_side;
    } else {
      cert.grad_l1_lower =
          chop_down(static_cast<long double>(m3_global) * nl * sqrtl(nl) *
                    eps / 2.0L);
      cert.grad_l1_lower_case_two = min_grad_side;
    }
    cert.det_g_lower = 0.0;
    cert.det_g_lower_case_two = 0.0;
  } else {
    if (cert.empty_manifold) {
      cert.det_g_lower = kInf;
      cert.det_g_lower_case_two = kInf;
    } else if (per_box) {
      cert.det_g_lower = min_grad_side;
      cert.det_g_lower_case_two = min_grad_side;
    } else {
      cert.det_g_lower = chop_down(
          nl * eps * static_cast<long double>(factorial(k)) *
          powl(static_cast<long double>(m2_global), 2.0L * k - 1.0L) *
          static_cast<long double>(m3_global));
      cert.det_g_lower_case_two = min_grad_side;
    }
    cert.grad_l1_lower = 0.0;
    cert.grad_l1_lower_case_two = 0.0;
  }
  if (cert.case_one.empty()) {
    cert.off_zero_lower = kInf;  // vacuous: no CaseOne region
  } else if (per_box) {
    cert.off_zero_lower = min_off_zero;
  } else {
    cert.off_zero_lower =
        chop_down(sqrtl(nl) * (eps / 2.0L) *
                  static_cast<long double>(m2_global));
  }
  return cert;
}

std::optional<std::vector<double>> newton_project(const FunctionSystem& fs,
                                                  std::vector<double> start,
                                                  double tol, int max_iter) {
  const int n = fs.ambient_dim();
  const int k = fs.size();
  if (static_cast<int>(start.size()) != n) return std::nullopt;
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = start[static_cast<std::size_t>(i)];
  try {
    for (int iter = 0; iter < max_iter; ++iter) {
      Eigen::VectorXd r(k);
      std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
      double worst = 0.0;
      for (int i = 0; i < k; ++i) {
        r[i] = eval_point(fs.function(i), xs);
        worst = std::max(worst, std::fabs(r[i]));
      }
      if (worst <= tol) {
        std::vector<double> out(x.data(), x.data() + n);
        return out;
      }
      Eigen::MatrixXd jac(k, n);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < n; ++j) {
          jac(i, j) = eval_point(fs.gradient(i, j), xs);
        }
      }
      Eigen::MatrixXd jjt = jac * jac.transpose();
      Eigen::LDLT<Eigen::MatrixXd> solver(jjt);
      if (solver.info() != Eigen::Success) return std::nullopt;
      Eigen::VectorXd step = jac.transpose() * solver.solve(r);
      if (!step.allFinite()) return std::nullopt;
      x -= step;
      if (!x.allFinite()) return std::nullopt;
    }
  } catch (const EvalDomainError&) {
    return std::nullopt;
  }
  return std::nullopt;
}

SampleReport sanity_check_sample(const FunctionSystem& fs,
                                 const SubdivisionCertificate& cert,
                                 std::size_t n_samples, std::uint64_t seed) {
  const int n = fs.ambient_dim();
  const int k = fs.size();
  SampleReport report;
  report.requested = n_samples;
  report.min_witness = kInf;
  report.certified_bound = (cert.mode == CertificateMode::SingleFunction)
                               ? cert.grad_l1_lower_case_two
                               : cert.det_g_lower_case_two;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-cert.half_width,
                                               cert.half_width);
  std::size_t attempts_left = 60 * n_samples + 100;
  while (report.landed < n_samples && attempts_left-- > 0) {
    std::vector<double> start(static_cast<std::size_t>(n));
    for (double& c : start) c = coord(rng);
    auto landed = newton_project(fs, std::move(start));
    if (!landed) continue;
    bool inside = true;
    for (double c : *landed) {
      if (std::fabs(c) > cert.half_width) inside = false;
    }
    if (!inside) continue;
    ++report.landed;
    std::span<const double> xs(landed->data(), landed->size());
    double witness = 0.0;
    if (cert.mode == CertificateMode::SingleFunction) {
      for (int j = 0; j < n; ++j) {
        witness += std::fabs(eval_point(fs.gradient(0, j), xs));
      }
    } else {
      Eigen::MatrixXd jac(k, n);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < n; ++j) {
          jac(i, j) = eval_point(fs.gradient(i, j), xs);
        }
      }
      Eigen::MatrixXd gram = jac * jac.transpose();
      witness = std::fabs(gram.determinant());
    }
    report.min_witness = std::min(report.min_witness, witness);
  }
  report.sampling_failed = report.landed < report.requested;
  if (cert.empty_manifold) {
    report.consistent = (report.landed == 0);
  } else {
    report.consistent =
        report.landed == 0 || report.min_witness >= report.certified_bound;
  }
  return report;
}

}  // namespace reachcert
