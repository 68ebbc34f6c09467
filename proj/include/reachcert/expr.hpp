#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reachcert {

// Immutable expression tree over real-valued formulas in variables x1..xN.
// Construction goes through smart constructors that perform constant folding
// (0*e -> 0, e+0 -> e, e^1 -> e, constants collapsed) so derivatives stay
// readable and evaluation stays cheap.
class Expr {
 public:
  enum class Kind : std::uint8_t {
    Constant,
    Variable,
    Sum,       // n-ary
    Product,   // n-ary
    Negate,
    Quotient,  // binary: children[0] / children[1]
    Power,     // children[0] ^ exponent, exponent unsigned
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
  };

  Expr() = default;  // empty handle; only produced by default construction

  static Expr constant(double value);
  static Expr variable(int index);
  static Expr sum(std::vector<Expr> terms);
  static Expr product(std::vector<Expr> factors);
  static Expr negate(Expr e);
  static Expr quotient(Expr numerator, Expr denominator);
  static Expr power(Expr base, unsigned exponent);
  static Expr apply(Kind function, Expr argument);  // Sin..Sqrt

  bool valid() const { return node_ != nullptr; }
  Kind kind() const;
  double constant_value() const;     // Constant only
  int variable_index() const;        // Variable only
  unsigned exponent() const;         // Power only
  const std::vector<Expr>& children() const;
  std::size_t node_count() const;

  bool is_constant(double v) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Expr make(Kind kind, double value, int var_index, unsigned exponent,
                   std::vector<Expr> children);
  std::shared_ptr<const Node> node_;
};

// Raised on malformed formula text; `offset` is the byte offset of the first
// offending character.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Raised when point evaluation leaves a function's domain (division by zero,
// log of a nonpositive value, sqrt of a negative value).
class EvalDomainError : public std::runtime_error {
 public:
  explicit EvalDomainError(const std::string& message)
      : std::runtime_error(message) {}
};

// Grammar (whitespace insignificant, documented in the README):
//   expr   := ['+'|'-'] term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' unsigned-int)?
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
// Identifiers: x1..xN, plus aliases x,y,z when ambient_dim <= 3; function
// names sin, cos, exp, log, sqrt.
Expr parse_formula(std::string_view text, int ambient_dim);

// Partial derivative with respect to variable `var_index`, simplified through
// the smart constructors.
Expr differentiate(const Expr& e, int var_index);

// Plain double evaluation at a point (round-to-nearest; no certification).
double eval_point(const Expr& e, std::span<const double> point);

// Formula text that parses back to an equivalent tree; float literals use
// shortest round-trip form.
std::string to_formula(const Expr& e);

// A system f1..fk : R^N -> R^k with cached symbolic gradients and Hessians.
class FunctionSystem {
 public:
  FunctionSystem(int ambient_dim, std::vector<Expr> functions);

  int ambient_dim() const { return ambient_dim_; }
  int size() const { return static_cast<int>(functions_.size()); }

  const Expr& function(int i) const { return functions_.at(i); }
  const Expr& gradient(int i, int j) const { return gradients_.at(i).at(j); }
  // Hessian entry d^2 f_i / (dx_j dx_l).
  const Expr& hessian(int i, int j, int l) const {
    return hessians_.at(i).at(j).at(l);
  }
  const std::vector<Expr>& functions() const { return functions_; }

 private:
  int ambient_dim_;
  std::vector<Expr> functions_;
  std::vector<std::vector<Expr>> gradients_;
  std::vector<std::vector<std::vector<Expr>>> hessians_;
};

}  // namespace reachcert
