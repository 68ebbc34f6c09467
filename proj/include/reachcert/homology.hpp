// Certified Betti numbers of a planar curve Z(f) ⊂ [-L,L]².
//
// A uniform grid of side delta covers the square; a cell is selected when its
// vertex signs witness a sign change (a zero vertex counts for both signs).
// When delta ≤ tau/2.37 for a certified reach lower bound tau, the union of
// selected closed cells deformation-retracts onto the curve, so the cubical
// complex has the curve's homology: b0 from connectivity, b1 from the Euler
// characteristic.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reachcert/expr.hpp"

namespace reachcert {

enum class SignClass : std::uint8_t { Pos, Neg, Zero, Uncertain };

struct SelectionGrid {
  double half_width = 0.0;  // L
  double delta = 0.0;       // actual cell side, 2L/cells
  int cells = 0;            // cells per axis
  // Row-major over (cells+1)² vertices; vertex (i,j) at index j*(cells+1)+i.
  std::vector<SignClass> vertex_signs;
  // Row-major over cells² cells; cell (i,j) at index j*cells+i.
  std::vector<std::uint8_t> selected;
  // False when uncertain vertices were coerced in conservative mode.
  bool certified = true;

  double vertex_x(int i) const;  // exact grid coordinate used for evaluation
  double vertex_y(int j) const { return vertex_x(j); }
  bool is_selected(int i, int j) const {
    return selected[static_cast<std::size_t>(j) * cells + i] != 0;
  }
  std::size_t selected_count() const;
};

// Raised when a vertex enclosure straddles zero and conservative mode is off.
struct UncertainSignError : std::runtime_error {
  UncertainSignError(std::vector<std::pair<double, double>> vertices,
                     std::size_t total);
  std::vector<std::pair<double, double>> vertices;  // first few offenders
  std::size_t total_uncertain = 0;
};

struct SelectionOptions {
  // Certified reach lower bound; the precondition delta ≤ tau/2.37 is
  // enforced unless skip_reach_check is set.
  double tau_lower = 0.0;
  bool skip_reach_check = false;
  // Treat uncertain vertex signs as zero (selects more cells) and mark the
  // grid non-certified instead of failing.
  bool conservative = false;
  int workers = 1;
};

// Build the selection grid for f over [-L,L]² with requested cell side
// delta. The side is snapped down so the square tiles exactly; vertex signs
// are certified by interval evaluation at the exact double coordinates of
// the grid. Throws UncertainSignError (unless conservative), and
// std::invalid_argument for parameter violations or when a certified
// selection reaches the boundary of the square (the curve must stay in the
// interior).
SelectionGrid select_boxes(const Expr& f, double half_width, double delta,
                           const SelectionOptions& options);

struct BettiNumbers {
  std::uint64_t b0 = 0;
  std::uint64_t b1 = 0;
};

struct ComplexCounts {
  std::uint64_t vertices = 0;  // de-duplicated vertices of selected cells
  std::uint64_t edges = 0;     // de-duplicated edges
  std::uint64_t faces = 0;     // selected cells
  std::uint64_t components = 0;
};

// Vertex/edge/face counts of the selected closed-cell union plus the number
// of connected components (cells sharing an edge or a corner are connected:
// closed boxes meet at shared vertices).
ComplexCounts complex_counts(const SelectionGrid& grid);

// V - E + F of the selected union.
std::int64_t euler_characteristic(const SelectionGrid& grid);

// b0 = components, b1 = b0 - (V - E + F). Deterministic.
BettiNumbers betti(const SelectionGrid& grid);

// Structured-text export: half-width, delta, cells, selected cell indices.
std::string export_grid(const SelectionGrid& grid);

// SVG: selected cells in green over a light frame, with a non-certified red
// polyline overlay of the curve sampled by marching squares. Deterministic.
std::string grid_to_svg(const SelectionGrid& grid, const Expr& f);

}  // namespace reachcert
