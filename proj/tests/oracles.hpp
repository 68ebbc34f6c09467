// Independent reference implementations used only by tests: a direct
// recursive evaluator, finite differences, sampling oracles, random SPD
// matrices, GF(2) cubical homology via boundary-matrix ranks, and random
// expression generators.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "reachcert/expr.hpp"
#include "reachcert/homology.hpp"
#include "reachcert/interval.hpp"

namespace oracles {

// Direct recursive evaluation, written independently of the library walker.
inline double eval_ref(const reachcert::Expr& e,
                       const std::vector<double>& x) {
  using reachcert::Expr;
  switch (e.kind()) {
    case Expr::Kind::Constant:
      return e.constant_value();
    case Expr::Kind::Variable:
      return x.at(static_cast<std::size_t>(e.variable_index()));
    case Expr::Kind::Sum: {
      double s = 0.0;
      for (const Expr& c : e.children()) s += eval_ref(c, x);
      return s;
    }
    case Expr::Kind::Product: {
      double p = 1.0;
      for (const Expr& c : e.children()) p *= eval_ref(c, x);
      return p;
    }
    case Expr::Kind::Negate:
      return -eval_ref(e.children()[0], x);
    case Expr::Kind::Quotient:
      return eval_ref(e.children()[0], x) / eval_ref(e.children()[1], x);
    case Expr::Kind::Power:
      return std::pow(eval_ref(e.children()[0], x),
                      static_cast<double>(e.exponent()));
    case Expr::Kind::Sin:
      return std::sin(eval_ref(e.children()[0], x));
    case Expr::Kind::Cos:
      return std::cos(eval_ref(e.children()[0], x));
    case Expr::Kind::Exp:
      return std::exp(eval_ref(e.children()[0], x));
    case Expr::Kind::Log:
      return std::log(eval_ref(e.children()[0], x));
    case Expr::Kind::Sqrt:
      return std::sqrt(eval_ref(e.children()[0], x));
  }
  throw std::logic_error("unknown node kind");
}

// Central finite difference of e in direction var at x.
inline double fd_partial(const reachcert::Expr& e, std::vector<double> x,
                         int var, double h = 6e-6) {
  x[static_cast<std::size_t>(var)] += h;
  double hi = eval_ref(e, x);
  x[static_cast<std::size_t>(var)] -= 2 * h;
  double lo = eval_ref(e, x);
  return (hi - lo) / (2 * h);
}

// Max of fn over a uniform grid of sample points in the box (a lower bound
// for the sup, used to check certified upper bounds).
template <class F>
double sampled_max(const reachcert::BoxDomain& box, int per_axis, F&& fn) {
  const int n = box.dim();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> pt(static_cast<std::size_t>(n));
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    for (int a = 0; a < n; ++a) {
      double t = per_axis == 1 ? 0.5
                               : static_cast<double>(idx[a]) / (per_axis - 1);
      pt[a] = box.lower[a] + t * (box.upper[a] - box.lower[a]);
    }
    best = std::max(best, fn(pt));
    int a = 0;
    while (a < n && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == n) break;
  }
  return best;
}

inline double grad_norm2_at(const reachcert::FunctionSystem& fs, int i,
                            const std::vector<double>& x) {
  double s = 0.0;
  for (int j = 0; j < fs.ambient_dim(); ++j) {
    double g = eval_ref(fs.gradient(i, j), x);
    s += g * g;
  }
  return std::sqrt(s);
}

inline double hess_fro_at(const reachcert::FunctionSystem& fs, int i,
                          const std::vector<double>& x) {
  double s = 0.0;
  for (int j = 0; j < fs.ambient_dim(); ++j) {
    for (int l = 0; l < fs.ambient_dim(); ++l) {
      double h = eval_ref(fs.hessian(i, j, l), x);
      s += h * h;
    }
  }
  return std::sqrt(s);
}

inline double grad_norm1_at(const reachcert::FunctionSystem& fs, int i,
                            const std::vector<double>& x) {
  double s = 0.0;
  for (int j = 0; j < fs.ambient_dim(); ++j) {
    s += std::fabs(eval_ref(fs.gradient(i, j), x));
  }
  return s;
}

inline Eigen::MatrixXd random_spd(int k, std::mt19937_64& rng,
                                  double eig_min = 0.1, double eig_max = 10.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  std::uniform_real_distribution<double> eig(eig_min, eig_max);
  Eigen::VectorXd d(k);
  for (int i = 0; i < k; ++i) d[i] = eig(rng);
  return q * d.asDiagonal() * q.transpose();
}

inline double norm1(const Eigen::MatrixXd& m) {
  double best = 0.0;
  for (int j = 0; j < m.cols(); ++j) {
    best = std::max(best, m.col(j).cwiseAbs().sum());
  }
  return best;
}

// GF(2) rank by column reduction over bit-packed columns.
class Gf2Matrix {
 public:
  explicit Gf2Matrix(std::size_t rows)
      : rows_(rows), words_((rows + 63) / 64) {}
  void add_column(const std::vector<std::size_t>& row_indices) {
    std::vector<std::uint64_t> col(words_, 0);
    for (std::size_t r : row_indices) {
      col[r / 64] ^= (std::uint64_t{1} << (r % 64));
    }
    cols_.push_back(std::move(col));
  }
  std::size_t rank() const {
    std::map<std::size_t, std::vector<std::uint64_t>> pivots;  // row -> col
    std::size_t rank = 0;
    for (auto col : cols_) {
      for (;;) {
        std::size_t low = lowest_bit(col);
        if (low == kNone) break;
        auto it = pivots.find(low);
        if (it == pivots.end()) {
          pivots.emplace(low, std::move(col));
          ++rank;
          break;
        }
        for (std::size_t w = 0; w < words_; ++w) col[w] ^= it->second[w];
      }
    }
    return rank;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::size_t lowest_bit(const std::vector<std::uint64_t>& col) const {
    for (std::size_t w = 0; w < words_; ++w) {
      if (col[w]) {
        return w * 64 +
               static_cast<std::size_t>(__builtin_ctzll(col[w]));
      }
    }
    return kNone;
  }
  std::size_t rows_;
  std::size_t words_;
  std::vector<std::vector<std::uint64_t>> cols_;
};

struct Z2Homology {
  std::uint64_t b0 = 0;
  std::uint64_t b1 = 0;
  std::uint64_t b2 = 0;
};

// Homology of the selected closed-cell union over GF(2) via boundary
// matrices: b0 = V - rank d1, b1 = (E - rank d1) - rank d2,
// b2 = F - rank d2.
inline Z2Homology z2_homology(const reachcert::SelectionGrid& grid) {
  const int cells = grid.cells;
  std::map<std::pair<int, int>, std::size_t> vid;
  std::map<std::pair<int, std::pair<int, int>>, std::size_t> eid;  // axis,(i,j)
  auto vertex = [&](int i, int j) {
    return vid.try_emplace({i, j}, vid.size()).first->second;
  };
  auto edge = [&](int axis, int i, int j) {
    return eid.try_emplace({axis, {i, j}}, eid.size()).first->second;
  };
  struct Face {
    std::size_t e[4];
  };
  std::vector<std::array<std::size_t, 2>> edge_verts;
  std::vector<Face> faces;
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!grid.is_selected(i, j)) continue;
      std::size_t v00 = vertex(i, j);
      std::size_t v10 = vertex(i + 1, j);
      std::size_t v01 = vertex(i, j + 1);
      std::size_t v11 = vertex(i + 1, j + 1);
      auto add_edge = [&](int axis, int ei, int ej, std::size_t a,
                          std::size_t b) {
        std::size_t id = edge(axis, ei, ej);
        if (id == edge_verts.size()) edge_verts.push_back({a, b});
        return id;
      };
      Face f;
      f.e[0] = add_edge(0, i, j, v00, v10);          // bottom
      f.e[1] = add_edge(0, i, j + 1, v01, v11);      // top
      f.e[2] = add_edge(1, i, j, v00, v01);          // left
      f.e[3] = add_edge(1, i + 1, j, v10, v11);      // right
      faces.push_back(f);
    }
  }
  const std::size_t v_count = vid.size();
  const std::size_t e_count = edge_verts.size();
  const std::size_t f_count = faces.size();

  Gf2Matrix d1(v_count);
  for (const auto& ev : edge_verts) {
    d1.add_column({ev[0], ev[1]});
  }
  Gf2Matrix d2(e_count);
  for (const Face& f : faces) {
    d2.add_column({f.e[0], f.e[1], f.e[2], f.e[3]});
  }
  std::size_t r1 = e_count == 0 ? 0 : d1.rank();
  std::size_t r2 = f_count == 0 ? 0 : d2.rank();
  Z2Homology out;
  out.b0 = v_count - r1;
  out.b1 = (e_count - r1) - r2;
  out.b2 = f_count - r2;
  return out;
}

// Random polynomial-style expression (no division/log/sqrt so finite
// differences behave everywhere).
inline reachcert::Expr random_poly(int dim, int depth, std::mt19937_64& rng,
                                   bool allow_transcendental = false) {
  using reachcert::Expr;
  std::uniform_int_distribution<int> coin(0, 99);
  if (depth <= 0 || coin(rng) < 25) {
    if (coin(rng) < 50) {
      std::uniform_int_distribution<int> c(-3, 3);
      return Expr::constant(static_cast<double>(c(rng)));
    }
    std::uniform_int_distribution<int> v(0, dim - 1);
    return Expr::variable(v(rng));
  }
  int pick = coin(rng);
  if (pick < 30) {
    return Expr::sum({random_poly(dim, depth - 1, rng, allow_transcendental),
                      random_poly(dim, depth - 1, rng, allow_transcendental)});
  }
  if (pick < 60) {
    return Expr::product(
        {random_poly(dim, depth - 1, rng, allow_transcendental),
         random_poly(dim, depth - 1, rng, allow_transcendental)});
  }
  if (pick < 70) {
    return Expr::negate(
        random_poly(dim, depth - 1, rng, allow_transcendental));
  }
  if (pick < 80) {
    std::uniform_int_distribution<unsigned> k(0, 3);
    return Expr::power(random_poly(dim, depth - 1, rng, allow_transcendental),
                       k(rng));
  }
  if (allow_transcendental) {
    auto arg = random_poly(dim, depth - 1, rng, false);
    if (pick < 87) return Expr::apply(Expr::Kind::Sin, arg);
    if (pick < 94) return Expr::apply(Expr::Kind::Cos, arg);
    return Expr::apply(Expr::Kind::Exp, arg);
  }
  return Expr::sum({random_poly(dim, depth - 1, rng, false),
                    random_poly(dim, depth - 1, rng, false)});
}

}  // namespace oracles
