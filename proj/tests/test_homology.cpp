#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "reachcert/expr.hpp"
#include "reachcert/homology.hpp"

using namespace reachcert;

namespace {

SelectionGrid manual_grid(int cells, const std::vector<std::pair<int, int>>& on) {
  SelectionGrid g;
  g.half_width = 1.0;
  g.cells = cells;
  g.delta = 2.0 / cells;
  g.selected.assign(static_cast<std::size_t>(cells) * cells, 0);
  for (auto [i, j] : on) {
    g.selected[static_cast<std::size_t>(j) * cells + i] = 1;
  }
  return g;
}

}  // namespace

TEST_CASE("unit circle selection has circle homology") {
  Expr f = parse_formula("x^2 + y^2 - 1", 2);
  SelectionOptions opt;
  opt.tau_lower = 0.0624;  // certified downstream; 0.025 <= 0.0624/2.37
  SelectionGrid grid = select_boxes(f, 2.0, 0.025, opt);

  CHECK(grid.cells == 160);
  CHECK(grid.delta == 0.025);
  CHECK(grid.certified);

  BettiNumbers b = betti(grid);
  CHECK(b.b0 == 1);
  CHECK(b.b1 == 1);

  // Every selected cell straddles the circle: among its corners the squared
  // distance from the origin reaches both sides of 1.
  std::size_t count = 0;
  for (int j = 0; j < grid.cells; ++j) {
    for (int i = 0; i < grid.cells; ++i) {
      if (!grid.is_selected(i, j)) continue;
      ++count;
      double rmin = 1e300, rmax = -1e300;
      for (int dj = 0; dj <= 1; ++dj) {
        for (int di = 0; di <= 1; ++di) {
          double x = grid.vertex_x(i + di);
          double y = grid.vertex_y(j + dj);
          double r2 = x * x + y * y;
          rmin = std::min(rmin, r2);
          rmax = std::max(rmax, r2);
        }
      }
      CHECK(rmin <= 1.0 + 1e-12);
      CHECK(rmax >= 1.0 - 1e-12);
    }
  }
  CHECK(count == grid.selected_count());
  // The circle crosses one cell per grid-line crossing: about 8 * (1/0.025)
  // = 320 cells, plus a conservative handful near touched vertices.
  CHECK(count > 250);
  CHECK(count < 500);

  // The independent GF(2) boundary-rank computation agrees.
  oracles::Z2Homology z2 = oracles::z2_homology(grid);
  CHECK(z2.b0 == 1);
  CHECK(z2.b1 == 1);
  CHECK(z2.b2 == 0);
}

TEST_CASE("grid vertices landing exactly on the curve are classed as zero") {
  Expr f = parse_formula("x^2 + y^2 - 1", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  SelectionGrid grid = select_boxes(f, 2.0, 0.025, opt);
  REQUIRE(grid.cells == 160);
  // Vertex index 120 lies at x = -2 + 120*(4/160) = 1 exactly.
  CHECK(grid.vertex_x(120) == 1.0);
  CHECK(grid.vertex_x(80) == 0.0);
  int nv = grid.cells + 1;
  CHECK(grid.vertex_signs[static_cast<std::size_t>(80) * nv + 120] ==
        SignClass::Zero);
  CHECK(grid.vertex_signs[static_cast<std::size_t>(120) * nv + 80] ==
        SignClass::Zero);
  CHECK(grid.vertex_signs[static_cast<std::size_t>(80) * nv + 159] ==
        SignClass::Pos);
  CHECK(grid.vertex_signs[static_cast<std::size_t>(80) * nv + 80] ==
        SignClass::Neg);
}

TEST_CASE("empty curves produce empty complexes") {
  Expr f = parse_formula("x^2 + y^2 + 1", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  SelectionGrid grid = select_boxes(f, 2.0, 0.05, opt);
  CHECK(grid.selected_count() == 0);
  BettiNumbers b = betti(grid);
  CHECK(b.b0 == 0);
  CHECK(b.b1 == 0);
  oracles::Z2Homology z2 = oracles::z2_homology(grid);
  CHECK(z2.b0 == 0);
  CHECK(z2.b1 == 0);
}

TEST_CASE("cell side snaps down to tile the square exactly") {
  Expr f = parse_formula("x^2 + y^2 - 0.25", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  SelectionGrid grid = select_boxes(f, 1.0, 0.3, opt);
  CHECK(grid.cells == 7);
  CHECK(grid.delta == 2.0 / 7);
  CHECK(grid.delta <= 0.3);
  CHECK(betti(grid).b0 == 1);
  CHECK(betti(grid).b1 == 1);
}

TEST_CASE("hand-built complexes have the expected counts") {
  // One cell: a disk.
  SelectionGrid one = manual_grid(4, {{1, 1}});
  ComplexCounts c1 = complex_counts(one);
  CHECK(c1.vertices == 4);
  CHECK(c1.edges == 4);
  CHECK(c1.faces == 1);
  CHECK(c1.components == 1);
  CHECK(euler_characteristic(one) == 1);
  CHECK(betti(one).b0 == 1);
  CHECK(betti(one).b1 == 0);

  // A 2x1 block: still a disk, shared edge counted once.
  SelectionGrid two = manual_grid(4, {{1, 1}, {2, 1}});
  ComplexCounts c2 = complex_counts(two);
  CHECK(c2.vertices == 6);
  CHECK(c2.edges == 7);
  CHECK(c2.faces == 2);
  CHECK(euler_characteristic(two) == 1);

  // Corner-touching diagonal cells are one component (closed cells meet).
  SelectionGrid diag = manual_grid(4, {{1, 1}, {2, 2}});
  ComplexCounts cd = complex_counts(diag);
  CHECK(cd.vertices == 7);
  CHECK(cd.edges == 8);
  CHECK(cd.faces == 2);
  CHECK(cd.components == 1);
  CHECK(betti(diag).b0 == 1);
  CHECK(betti(diag).b1 == 0);

  // A hollow 3x3 ring: a circle.
  SelectionGrid ring = manual_grid(
      5, {{1, 1}, {2, 1}, {3, 1}, {1, 2}, {3, 2}, {1, 3}, {2, 3}, {3, 3}});
  CHECK(betti(ring).b0 == 1);
  CHECK(betti(ring).b1 == 1);

  // Two separate cells: two components.
  SelectionGrid pair = manual_grid(6, {{1, 1}, {4, 4}});
  CHECK(betti(pair).b0 == 2);
  CHECK(betti(pair).b1 == 0);

  // Empty grid.
  SelectionGrid none = manual_grid(3, {});
  CHECK(betti(none).b0 == 0);
  CHECK(betti(none).b1 == 0);
}

TEST_CASE("betti numbers agree with GF(2) boundary ranks on random complexes") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    int cells = 4 + static_cast<int>(rng() % 12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double density = 0.15 + 0.5 * u(rng);
    std::vector<std::pair<int, int>> on;
    for (int j = 0; j < cells; ++j) {
      for (int i = 0; i < cells; ++i) {
        if (u(rng) < density) on.emplace_back(i, j);
      }
    }
    SelectionGrid grid = manual_grid(cells, on);
    BettiNumbers b = betti(grid);
    oracles::Z2Homology z2 = oracles::z2_homology(grid);
    CAPTURE(trial);
    CAPTURE(cells);
    CHECK(b.b0 == z2.b0);
    CHECK(b.b1 == z2.b1);
    // Planar cubical complexes never close a 2-cycle.
    CHECK(z2.b2 == 0);
    // The defining identity: b1 = b0 - chi.
    CHECK(static_cast<std::int64_t>(b.b1) ==
          static_cast<std::int64_t>(b.b0) - euler_characteristic(grid));
  }
}

TEST_CASE("uncertain vertex signs fail loudly by default") {
  // exp(x) - exp(y) vanishes on the diagonal; every diagonal vertex enclosure
  // straddles zero by a few ulps and cannot be certified.
  Expr f = parse_formula("exp(x) - exp(y)", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  bool threw = false;
  try {
    select_boxes(f, 1.0, 0.25, opt);
  } catch (const UncertainSignError& e) {
    threw = true;
    CHECK(e.total_uncertain == 9);  // cells = 8, one vertex per diagonal index
    CHECK(e.vertices.size() == 9);
    for (auto [x, y] : e.vertices) CHECK(x == y);
    CHECK(std::string(e.what()).find("cannot certify") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("conservative mode coerces uncertain vertices and drops certification") {
  Expr f = parse_formula("exp(x) - exp(y)", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  opt.conservative = true;
  SelectionGrid grid = select_boxes(f, 1.0, 0.25, opt);
  CHECK(!grid.certified);
  CHECK(grid.selected_count() > 0);
  // The diagonal band is one contractible strip.
  BettiNumbers b = betti(grid);
  CHECK(b.b0 == 1);
  CHECK(b.b1 == 0);
  oracles::Z2Homology z2 = oracles::z2_homology(grid);
  CHECK(z2.b0 == 1);
  CHECK(z2.b1 == 0);
}

TEST_CASE("curves touching the square boundary are rejected") {
  Expr f = parse_formula("x^2 + y^2 - 1", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  CHECK_THROWS_AS(select_boxes(f, 1.0, 0.1, opt), std::invalid_argument);
}

TEST_CASE("the reach precondition is enforced") {
  Expr f = parse_formula("x^2 + y^2 - 1", 2);
  SelectionOptions opt;
  opt.tau_lower = 0.05;  // 0.025 > 0.05/2.37, too coarse
  CHECK_THROWS_AS(select_boxes(f, 2.0, 0.025, opt), std::invalid_argument);
  opt.tau_lower = 0.0;
  CHECK_THROWS_AS(select_boxes(f, 2.0, 0.025, opt), std::invalid_argument);
  opt.tau_lower = -1.0;
  CHECK_THROWS_AS(select_boxes(f, 2.0, 0.025, opt), std::invalid_argument);

  CHECK_THROWS_AS(select_boxes(f, 0.0, 0.025, SelectionOptions{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(select_boxes(f, 2.0, 0.0, SelectionOptions{1.0}),
                  std::invalid_argument);
}

TEST_CASE("selection is independent of the worker count") {
  Expr f = parse_formula("x^2 + y^2 - 1", 2);
  std::string reference;
  for (int workers : {1, 2, 8}) {
    SelectionOptions opt;
    opt.skip_reach_check = true;
    opt.workers = workers;
    SelectionGrid grid = select_boxes(f, 2.0, 0.05, opt);
    std::string text = export_grid(grid);
    if (reference.empty()) {
      reference = text;
    } else {
      CHECK(text == reference);
    }
  }
  CHECK(reference.find("selection-grid v1") == 0);
  CHECK(reference.find("cells 80") != std::string::npos);
}

TEST_CASE("grid export and rendering are deterministic") {
  Expr f = parse_formula("x^2 + y^2 - 1", 2);
  SelectionOptions opt;
  opt.skip_reach_check = true;
  SelectionGrid grid = select_boxes(f, 2.0, 0.1, opt);

  std::string e1 = export_grid(grid);
  std::string e2 = export_grid(grid);
  CHECK(e1 == e2);
  CHECK(e1.find("half_width 2") != std::string::npos);
  CHECK(e1.find("end\n") != std::string::npos);
  // One "cell i j" line per selected cell.
  std::size_t lines = 0, pos = 0;
  while ((pos = e1.find("\ncell ", pos)) != std::string::npos) {
    ++lines;
    pos += 6;
  }
  CHECK(lines == grid.selected_count());

  std::string s1 = grid_to_svg(grid, f);
  std::string s2 = grid_to_svg(grid, f);
  CHECK(s1 == s2);
  CHECK(s1.rfind("<svg", 0) == 0);
  // One green rect per selected cell.
  std::size_t rects = 0;
  pos = 0;
  while ((pos = s1.find("#3a4", pos)) != std::string::npos) {
    ++rects;
    pos += 4;
  }
  CHECK(rects == grid.selected_count());
}
