#include "reachcert/homology.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "reachcert/certificate_io.hpp"
#include "reachcert/interval.hpp"
#include "reachcert/parallel.hpp"

namespace reachcert {

double SelectionGrid::vertex_x(int i) const {
  // -L + (i*2L)/cells: the product is exact for moderate i, and the single
  // division lands exactly on representable grid points (e.g. integers)
  // whenever the true quotient is representable.
  return -half_width +
         (static_cast<double>(i) * (2.0 * half_width)) / cells;
}

std::size_t SelectionGrid::selected_count() const {
  std::size_t n = 0;
  for (std::uint8_t s : selected) n += s != 0;
  return n;
}

UncertainSignError::UncertainSignError(
    std::vector<std::pair<double, double>> verts, std::size_t total)
    : std::runtime_error("cannot certify the sign of " +
                         std::to_string(total) +
                         " grid vertices (enclosures straddle zero)"),
      vertices(std::move(verts)),
      total_uncertain(total) {}

namespace {

// Sign pre-filter: when one interval evaluation proves f keeps a single sign
// on a whole sub-rectangle of the grid, every vertex inside inherits that
// sign without an individual evaluation. Rectangles whose enclosure straddles
// zero are split along their longer axis; small tiles are left to the
// per-vertex sharp pass. Any sign assigned here is one the sharp evaluator
// would also certify, so the resulting grid is identical to the unfiltered
// one — this is purely a fast path for vertices far from the zero set.
// Sequential, hence independent of the worker count.
void prefilter_signs(const Expr& f, const SelectionGrid& grid, int i0, int i1,
                     int j0, int j1, std::vector<SignClass>& signs,
                     std::vector<std::uint8_t>& resolved) {
  BoxDomain box({grid.vertex_x(i0), grid.vertex_y(j0)},
                {grid.vertex_x(i1), grid.vertex_y(j1)});
  bool pos = false;
  bool neg = false;
  try {
    Interval v = enclose(f, box);
    pos = v.lo > 0.0;
    neg = v.hi < 0.0;
  } catch (const EnclosureDomainError&) {
    // Not evaluable over the whole rectangle: resolve per vertex below.
  }
  if (pos || neg) {
    const int nv = grid.cells + 1;
    const SignClass s = pos ? SignClass::Pos : SignClass::Neg;
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        std::size_t idx = static_cast<std::size_t>(j) * nv + i;
        signs[idx] = s;
        resolved[idx] = 1;
      }
    }
    return;
  }
  const int wi = i1 - i0;
  const int wj = j1 - j0;
  if (wi <= 4 && wj <= 4) return;
  if (wi >= wj) {
    const int mi = i0 + wi / 2;
    prefilter_signs(f, grid, i0, mi, j0, j1, signs, resolved);
    prefilter_signs(f, grid, mi, i1, j0, j1, signs, resolved);
  } else {
    const int mj = j0 + wj / 2;
    prefilter_signs(f, grid, i0, i1, j0, mj, signs, resolved);
    prefilter_signs(f, grid, i0, i1, mj, j1, signs, resolved);
  }
}

}  // namespace

SelectionGrid select_boxes(const Expr& f, double half_width, double delta,
                           const SelectionOptions& options) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw std::invalid_argument("half width must be positive and finite");
  }
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("cell side must be positive and finite");
  }
  if (!options.skip_reach_check) {
    if (!(options.tau_lower > 0.0)) {
      throw std::invalid_argument(
          "a positive certified reach lower bound is required (or set "
          "skip_reach_check)");
    }
    if (!(static_cast<long double>(delta) <=
          static_cast<long double>(options.tau_lower) / 2.37L)) {
      throw std::invalid_argument(
          "cell side violates delta <= tau/2.37 for the supplied reach "
          "bound");
    }
  }

  SelectionGrid grid;
  grid.half_width = half_width;
  long double cells_ld = ceill(2.0L * static_cast<long double>(half_width) /
                               static_cast<long double>(delta));
  if (!(cells_ld >= 1.0L) || cells_ld > 1e9L) {
    throw std::invalid_argument("cell side yields an unreasonable grid size");
  }
  int cells = static_cast<int>(cells_ld);
  // Snapping down: ensure the actual side never exceeds the request.
  while ((2.0 * half_width) / cells > delta) ++cells;
  grid.cells = cells;
  grid.delta = (2.0 * half_width) / cells;

  const int nv = cells + 1;
  grid.vertex_signs.assign(static_cast<std::size_t>(nv) * nv,
                           SignClass::Uncertain);
  std::vector<std::uint8_t> resolved(grid.vertex_signs.size(), 0);
  prefilter_signs(f, grid, 0, cells, 0, cells, grid.vertex_signs, resolved);
  std::atomic<std::size_t> uncertain_count{0};
  parallel_for(static_cast<std::size_t>(nv) * nv, std::max(1, options.workers),
               [&](std::size_t idx) {
                 if (resolved[idx]) return;
                 int i = static_cast<int>(idx % nv);
                 int j = static_cast<int>(idx / nv);
                 double pt[2] = {grid.vertex_x(i), grid.vertex_y(j)};
                 // The sharp evaluator keeps signs certifiable at vertices
                 // that sit within a few double ulps of the curve.
                 Interval v =
                     enclose_point_sharp(f, std::span<const double>(pt, 2));
                 SignClass s;
                 if (v.lo > 0.0) {
                   s = SignClass::Pos;
                 } else if (v.hi < 0.0) {
                   s = SignClass::Neg;
                 } else if (v.lo == 0.0 && v.hi == 0.0) {
                   s = SignClass::Zero;
                 } else {
                   s = SignClass::Uncertain;
                   uncertain_count.fetch_add(1, std::memory_order_relaxed);
                 }
                 grid.vertex_signs[idx] = s;
               });

  if (uncertain_count.load() > 0) {
    if (!options.conservative) {
      std::vector<std::pair<double, double>> offenders;
      for (std::size_t idx = 0;
           idx < grid.vertex_signs.size() && offenders.size() < 32; ++idx) {
        if (grid.vertex_signs[idx] == SignClass::Uncertain) {
          int i = static_cast<int>(idx % nv);
          int j = static_cast<int>(idx / nv);
          offenders.emplace_back(grid.vertex_x(i), grid.vertex_y(j));
        }
      }
      throw UncertainSignError(std::move(offenders), uncertain_count.load());
    }
    for (SignClass& s : grid.vertex_signs) {
      if (s == SignClass::Uncertain) s = SignClass::Zero;
    }
    grid.certified = false;
  }

  grid.selected.assign(static_cast<std::size_t>(cells) * cells, 0);
  parallel_for(
      static_cast<std::size_t>(cells) * cells, std::max(1, options.workers),
      [&](std::size_t idx) {
        int i = static_cast<int>(idx % cells);
        int j = static_cast<int>(idx / cells);
        bool has_nonneg = false;
        bool has_nonpos = false;
        for (int dj = 0; dj <= 1; ++dj) {
          for (int di = 0; di <= 1; ++di) {
            SignClass s =
                grid.vertex_signs[static_cast<std::size_t>(j + dj) * nv + i +
                                  di];
            if (s == SignClass::Pos || s == SignClass::Zero) has_nonneg = true;
            if (s == SignClass::Neg || s == SignClass::Zero) has_nonpos = true;
          }
        }
        grid.selected[idx] = (has_nonneg && has_nonpos) ? 1 : 0;
      });

  if (grid.certified) {
    for (int i = 0; i < cells; ++i) {
      if (grid.is_selected(i, 0) || grid.is_selected(i, cells - 1) ||
          grid.is_selected(0, i) || grid.is_selected(cells - 1, i)) {
        throw std::invalid_argument(
            "selected cells reach the boundary of the square; the curve "
            "must lie strictly inside");
      }
    }
  }
  return grid;
}

namespace {

struct UnionFind {
  std::vector<std::int64_t> parent;
  explicit UnionFind(std::size_t n) : parent(n, -1) {}
  std::int64_t find(std::int64_t x) {
    while (parent[x] >= 0) {
      if (parent[parent[x]] >= 0) parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::int64_t a, std::int64_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (parent[a] > parent[b]) std::swap(a, b);  // more negative = larger
    parent[a] += parent[b];
    parent[b] = a;
  }
};

}  // namespace

ComplexCounts complex_counts(const SelectionGrid& grid) {
  const int cells = grid.cells;
  const int nv = cells + 1;
  ComplexCounts out;

  std::vector<std::uint8_t> vert(static_cast<std::size_t>(nv) * nv, 0);
  // Horizontal edge (i,j)-(i+1,j): index j*cells+i; vertical edge
  // (i,j)-(i,j+1): index j*nv+i.
  std::vector<std::uint8_t> hedge(static_cast<std::size_t>(nv) * cells, 0);
  std::vector<std::uint8_t> vedge(static_cast<std::size_t>(cells) * nv, 0);

  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!grid.is_selected(i, j)) continue;
      ++out.faces;
      vert[static_cast<std::size_t>(j) * nv + i] = 1;
      vert[static_cast<std::size_t>(j) * nv + i + 1] = 1;
      vert[static_cast<std::size_t>(j + 1) * nv + i] = 1;
      vert[static_cast<std::size_t>(j + 1) * nv + i + 1] = 1;
      hedge[static_cast<std::size_t>(j) * cells + i] = 1;
      hedge[static_cast<std::size_t>(j + 1) * cells + i] = 1;
      vedge[static_cast<std::size_t>(j) * nv + i] = 1;
      vedge[static_cast<std::size_t>(j) * nv + i + 1] = 1;
    }
  }
  for (std::uint8_t v : vert) out.vertices += v;
  for (std::uint8_t e : hedge) out.edges += e;
  for (std::uint8_t e : vedge) out.edges += e;

  UnionFind uf(static_cast<std::size_t>(cells) * cells);
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!grid.is_selected(i, j)) continue;
      std::int64_t idx = static_cast<std::int64_t>(j) * cells + i;
      // Closed cells meet when they share an edge or a corner.
      if (i + 1 < cells && grid.is_selected(i + 1, j)) uf.unite(idx, idx + 1);
      if (j + 1 < cells) {
        if (grid.is_selected(i, j + 1)) uf.unite(idx, idx + cells);
        if (i + 1 < cells && grid.is_selected(i + 1, j + 1)) {
          uf.unite(idx, idx + cells + 1);
        }
        if (i > 0 && grid.is_selected(i - 1, j + 1)) {
          uf.unite(idx, idx + cells - 1);
        }
      }
    }
  }
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      if (!grid.is_selected(i, j)) continue;
      std::int64_t idx = static_cast<std::int64_t>(j) * cells + i;
      if (uf.find(idx) == idx) ++out.components;
    }
  }
  return out;
}

std::int64_t euler_characteristic(const SelectionGrid& grid) {
  ComplexCounts c = complex_counts(grid);
  return static_cast<std::int64_t>(c.vertices) -
         static_cast<std::int64_t>(c.edges) +
         static_cast<std::int64_t>(c.faces);
}

BettiNumbers betti(const SelectionGrid& grid) {
  ComplexCounts c = complex_counts(grid);
  std::int64_t chi = static_cast<std::int64_t>(c.vertices) -
                     static_cast<std::int64_t>(c.edges) +
                     static_cast<std::int64_t>(c.faces);
  std::int64_t b1 = static_cast<std::int64_t>(c.components) - chi;
  if (b1 < 0) {
    throw std::logic_error(
        "negative first Betti number: complex accounting is inconsistent");
  }
  return BettiNumbers{c.components, static_cast<std::uint64_t>(b1)};
}

std::string export_grid(const SelectionGrid& grid) {
  std::ostringstream out;
  out << "selection-grid v1\n";
  out << "half_width " << format_double(grid.half_width) << '\n';
  out << "delta " << format_double(grid.delta) << '\n';
  out << "cells " << grid.cells << '\n';
  out << "certified " << (grid.certified ? 1 : 0) << '\n';
  out << "selected_count " << grid.selected_count() << '\n';
  for (int j = 0; j < grid.cells; ++j) {
    for (int i = 0; i < grid.cells; ++i) {
      if (grid.is_selected(i, j)) out << "cell " << i << ' ' << j << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

namespace {

// Non-certified curve sampling for the SVG overlay: marching squares with
// linear interpolation on a refined grid.
struct Segment {
  double x0, y0, x1, y1;
};

std::vector<Segment> sample_curve(const SelectionGrid& grid, const Expr& f) {
  const int res = std::min(512, std::max(grid.cells * 2, 64));
  const double l = grid.half_width;
  std::vector<double> vals(static_cast<std::size_t>(res + 1) * (res + 1));
  auto coord = [&](int i) { return -l + (2.0 * l * i) / res; };
  for (int j = 0; j <= res; ++j) {
    for (int i = 0; i <= res; ++i) {
      double pt[2] = {coord(i), coord(j)};
      double v;
      try {
        v = eval_point(f, std::span<const double>(pt, 2));
      } catch (const EvalDomainError&) {
        v = std::numeric_limits<double>::quiet_NaN();
      }
      vals[static_cast<std::size_t>(j) * (res + 1) + i] = v;
    }
  }
  auto lerp = [](double a, double b, double fa, double fb) {
    double t = fa / (fa - fb);
    return a + t * (b - a);
  };
  std::vector<Segment> segs;
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      double f00 = vals[static_cast<std::size_t>(j) * (res + 1) + i];
      double f10 = vals[static_cast<std::size_t>(j) * (res + 1) + i + 1];
      double f01 = vals[static_cast<std::size_t>(j + 1) * (res + 1) + i];
      double f11 = vals[static_cast<std::size_t>(j + 1) * (res + 1) + i + 1];
      if (!std::isfinite(f00) || !std::isfinite(f10) || !std::isfinite(f01) ||
          !std::isfinite(f11)) {
        continue;
      }
      double x0 = coord(i), x1 = coord(i + 1);
      double y0 = coord(j), y1 = coord(j + 1);
      // Crossing points on the four cell sides.
      std::vector<std::pair<double, double>> pts;
      if ((f00 < 0) != (f10 < 0)) pts.emplace_back(lerp(x0, x1, f00, f10), y0);
      if ((f01 < 0) != (f11 < 0)) pts.emplace_back(lerp(x0, x1, f01, f11), y1);
      if ((f00 < 0) != (f01 < 0)) pts.emplace_back(x0, lerp(y0, y1, f00, f01));
      if ((f10 < 0) != (f11 < 0)) pts.emplace_back(x1, lerp(y0, y1, f10, f11));
      if (pts.size() == 2) {
        segs.push_back({pts[0].first, pts[0].second, pts[1].first,
                        pts[1].second});
      } else if (pts.size() == 4) {
        // Saddle: connect in sampled order (visual aid only).
        segs.push_back({pts[0].first, pts[0].second, pts[2].first,
                        pts[2].second});
        segs.push_back({pts[1].first, pts[1].second, pts[3].first,
                        pts[3].second});
      }
    }
  }
  return segs;
}

}  // namespace

std::string grid_to_svg(const SelectionGrid& grid, const Expr& f) {
  const double l = grid.half_width;
  const double view = 2.0 * l;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\""
      << format_double(-l) << ' ' << format_double(-l) << ' '
      << format_double(view) << ' ' << format_double(view)
      << "\" width=\"800\" height=\"800\">\n";
  out << "<rect x=\"" << format_double(-l) << "\" y=\"" << format_double(-l)
      << "\" width=\"" << format_double(view) << "\" height=\""
      << format_double(view)
      << "\" fill=\"white\" stroke=\"#444\" stroke-width=\""
      << format_double(view / 400.0) << "\"/>\n";
  // Selected cells (grid y grows upward; SVG y grows downward — flip).
  for (int j = 0; j < grid.cells; ++j) {
    for (int i = 0; i < grid.cells; ++i) {
      if (!grid.is_selected(i, j)) continue;
      double x = grid.vertex_x(i);
      double ytop = -grid.vertex_y(j + 1);
      out << "<rect x=\"" << format_double(x) << "\" y=\""
          << format_double(ytop) << "\" width=\"" << format_double(grid.delta)
          << "\" height=\"" << format_double(grid.delta)
          << "\" fill=\"#3a4\" fill-opacity=\"0.55\"/>\n";
    }
  }
  for (const Segment& s : sample_curve(grid, f)) {
    out << "<line x1=\"" << format_double(s.x0) << "\" y1=\""
        << format_double(-s.y0) << "\" x2=\"" << format_double(s.x1)
        << "\" y2=\"" << format_double(-s.y1)
        << "\" stroke=\"#c22\" stroke-width=\""
        << format_double(view / 500.0) << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace reachcert
