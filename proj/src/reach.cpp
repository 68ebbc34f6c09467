#include "reachcert/reach.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

#include "reachcert/interval.hpp"

namespace reachcert {

namespace {
using rounding::chop_down;
using rounding::chop_up;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be positive");
  }
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0)) {
    throw std::invalid_argument(std::string(name) + " must be nonnegative");
  }
}
}  // namespace

ReachCertificate reach_lower_single(double c1, double c2, int ambient_dim) {
  require_positive(c1, "hessian bound c1");
  require_nonnegative(c2, "gradient lower bound c2");
  if (ambient_dim < 1) {
    throw std::invalid_argument("ambient dimension must be at least 1");
  }
  ReachCertificate cert;
  cert.inputs = {{"C1", c1},
                 {"C2", c2},
                 {"N", static_cast<double>(ambient_dim)}};
  if (std::isinf(c2)) {  // empty certified region: vacuously unbounded
    cert.curvature_radius = LowerBound::infinite();
    cert.bottleneck_half = LowerBound::infinite();
    cert.tau = LowerBound::infinite();
    return cert;
  }
  const long double sqrt_n = sqrtl(static_cast<long double>(ambient_dim));
  const long double c1l = c1;
  const long double c2l = c2;
  cert.curvature_radius = LowerBound::finite(chop_down(c2l / (sqrt_n * c1l)));
  cert.bottleneck_half =
      LowerBound::finite(chop_down(c2l / (2.0L * sqrt_n * c1l)));
  cert.tau = min_bound(cert.curvature_radius, cert.bottleneck_half);
  return cert;
}

Eigen::MatrixXd orthonormalize_gram(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols() || g.rows() < 1) {
    throw std::invalid_argument("gram matrix must be square and nonempty");
  }
  if (!g.isApprox(g.transpose(), 1e-12)) {
    throw std::invalid_argument("gram matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gram matrix must be positive definite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("gram matrix must be positive definite");
  }
  Eigen::VectorXd inv_sqrt =
      es.eigenvalues().array().sqrt().inverse().matrix();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

double sqrt_inv_entry_bound(double norm1_g, double det_g, int d) {
  require_positive(det_g, "gram determinant");
  require_nonnegative(norm1_g, "gram 1-norm");
  if (d < 1) throw std::invalid_argument("dimension must be at least 1");
  const long double dl = d;
  const long double exponent = 2.0L + (dl - 1.0L) / 4.0L;
  long double v = powl(dl, exponent) *
                  powl(static_cast<long double>(norm1_g), (dl - 1.0L) / 2.0L) /
                  sqrtl(static_cast<long double>(det_g));
  return chop_up(v);
}

double second_ff_bound_system(double norm1_g, double det_g, int k,
                              const std::vector<double>& hess_bounds) {
  require_positive(det_g, "gram determinant");
  require_nonnegative(norm1_g, "gram 1-norm");
  if (k < 1) throw std::invalid_argument("function count must be at least 1");
  if (hess_bounds.size() != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("need one hessian bound per function");
  }
  long double hess_sum = 0.0L;
  for (double h : hess_bounds) {
    require_nonnegative(h, "hessian bound");
    hess_sum += static_cast<long double>(h);
  }
  const long double kl = k;
  long double v = powl(kl, 3.0L + (kl - 1.0L) / 4.0L) *
                  powl(static_cast<long double>(norm1_g), (kl - 1.0L) / 2.0L) /
                  sqrtl(static_cast<long double>(det_g)) * hess_sum;
  return chop_up(v);
}

double norm_equiv_C4(double norm1_g, double det_g, int ambient_dim) {
  require_positive(det_g, "gram determinant");
  require_nonnegative(norm1_g, "gram 1-norm");
  if (ambient_dim < 1) {
    throw std::invalid_argument("ambient dimension must be at least 1");
  }
  const long double nl = ambient_dim;
  long double v = powl(nl, 4.0L + (nl - 1.0L) / 4.0L) *
                  powl(static_cast<long double>(norm1_g), (nl - 1.0L) / 2.0L) /
                  sqrtl(static_cast<long double>(det_g));
  return chop_up(v);
}

double bottleneck_bound_system(double c4, int k, double hess_upper,
                               double grad_upper) {
  require_positive(c4, "norm equivalence constant");
  require_positive(hess_upper, "hessian bound");
  require_positive(grad_upper, "gradient bound");
  if (k < 1) throw std::invalid_argument("function count must be at least 1");
  const long double c4l = c4;
  const long double kl = k;
  long double denom = 2.0L * c4l * kl * static_cast<long double>(hess_upper) *
                      (static_cast<long double>(grad_upper) * c4l * kl + 1.0L);
  return chop_down(1.0L / denom);
}

ReachCertificate reach_lower_system(const SystemReachInputs& in) {
  require_positive(in.det_gram_lower, "gram determinant lower bound");
  require_positive(in.gram_norm1_upper, "gram 1-norm upper bound");
  require_nonnegative(in.hess_upper, "hessian bound");
  require_nonnegative(in.grad_upper, "gradient bound");
  if (in.ambient_dim < 1 || in.function_count < 1) {
    throw std::invalid_argument("dimensions must be at least 1");
  }
  const int k = in.function_count;
  ReachCertificate cert;
  cert.inputs = {{"N", static_cast<double>(in.ambient_dim)},
                 {"k", static_cast<double>(k)},
                 {"C5", in.gram_norm1_upper},
                 {"C6", in.det_gram_lower},
                 {"C7", in.hess_upper},
                 {"C8", in.grad_upper}};

  if (in.hess_upper == 0.0) {  // affine system: flat, reach unbounded
    cert.curvature_radius = LowerBound::infinite();
    cert.bottleneck_half = LowerBound::infinite();
    cert.tau = LowerBound::infinite();
    return cert;
  }

  const long double kl = k;
  const long double c5 = in.gram_norm1_upper;
  const long double c6 = in.det_gram_lower;
  const long double c7 = in.hess_upper;
  long double rho = powl(kl, -4.0L - (kl - 1.0L) / 4.0L) * sqrtl(c6) /
                    (powl(c5, (kl - 1.0L) / 2.0L) * c7);
  cert.curvature_radius = LowerBound::finite(chop_down(rho));

  double c4 = norm_equiv_C4(in.gram_norm1_upper, in.det_gram_lower,
                            in.ambient_dim);
  cert.inputs.emplace_back("C4", c4);
  double lambda =
      bottleneck_bound_system(c4, k, in.hess_upper, in.grad_upper);
  cert.bottleneck_half =
      LowerBound::finite(chop_down(static_cast<long double>(lambda) / 2.0L));
  cert.tau = min_bound(cert.curvature_radius, cert.bottleneck_half);
  return cert;
}

}  // namespace reachcert
