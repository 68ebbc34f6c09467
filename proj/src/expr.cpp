#include "reachcert/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <utility>

namespace reachcert {

struct Expr::Node {
  Kind kind;
  double value = 0.0;       // Constant
  int var_index = -1;       // Variable
  unsigned exponent = 0;    // Power
  std::vector<Expr> children;
};

Expr Expr::make(Kind kind, double value, int var_index, unsigned exponent,
                std::vector<Expr> children) {
  auto node = std::make_shared<Node>();
  node->kind = kind;
  node->value = value;
  node->var_index = var_index;
  node->exponent = exponent;
  node->children = std::move(children);
  return Expr(std::move(node));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
int Expr::variable_index() const { return node_->var_index; }
unsigned Expr::exponent() const { return node_->exponent; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

bool Expr::is_constant(double v) const {
  return node_ && node_->kind == Kind::Constant && node_->value == v;
}

std::size_t Expr::node_count() const {
  std::size_t n = 1;
  for (const Expr& c : node_->children) n += c.node_count();
  return n;
}

Expr Expr::constant(double value) {
  return make(Kind::Constant, value, -1, 0, {});
}

Expr Expr::variable(int index) {
  if (index < 0) throw std::invalid_argument("variable index must be >= 0");
  return make(Kind::Variable, 0.0, index, 0, {});
}

Expr Expr::sum(std::vector<Expr> terms) {
  std::vector<Expr> kept;
  double folded = 0.0;
  bool saw_constant = false;
  for (Expr& t : terms) {
    if (!t.valid()) throw std::invalid_argument("empty expression in sum");
    if (t.kind() == Kind::Sum) {  // flatten nested sums
      for (const Expr& c : t.children()) {
        if (c.kind() == Kind::Constant) {
          folded += c.constant_value();
          saw_constant = true;
        } else {
          kept.push_back(c);
        }
      }
    } else if (t.kind() == Kind::Constant) {
      folded += t.constant_value();
      saw_constant = true;
    } else {
      kept.push_back(std::move(t));
    }
  }
  if (saw_constant && folded != 0.0) kept.push_back(Expr::constant(folded));
  if (kept.empty()) return Expr::constant(0.0);
  if (kept.size() == 1) return kept.front();
  return make(Kind::Sum, 0.0, -1, 0, std::move(kept));
}

Expr Expr::product(std::vector<Expr> factors) {
  std::vector<Expr> kept;
  double folded = 1.0;
  bool saw_constant = false;
  for (Expr& f : factors) {
    if (!f.valid()) throw std::invalid_argument("empty expression in product");
    if (f.kind() == Kind::Product) {
      for (const Expr& c : f.children()) {
        if (c.kind() == Kind::Constant) {
          folded *= c.constant_value();
          saw_constant = true;
        } else {
          kept.push_back(c);
        }
      }
    } else if (f.kind() == Kind::Constant) {
      folded *= f.constant_value();
      saw_constant = true;
    } else {
      kept.push_back(std::move(f));
    }
  }
  if (saw_constant && folded == 0.0) return Expr::constant(0.0);
  if (saw_constant && folded != 1.0) {
    kept.insert(kept.begin(), Expr::constant(folded));
  }
  if (kept.empty()) return Expr::constant(1.0);
  if (kept.size() == 1) return kept.front();
  return make(Kind::Product, 0.0, -1, 0, std::move(kept));
}

Expr Expr::negate(Expr e) {
  if (!e.valid()) throw std::invalid_argument("empty expression in negate");
  if (e.kind() == Kind::Constant) return Expr::constant(-e.constant_value());
  if (e.kind() == Kind::Negate) return e.children().front();
  return make(Kind::Negate, 0.0, -1, 0, {std::move(e)});
}

Expr Expr::quotient(Expr numerator, Expr denominator) {
  if (!numerator.valid() || !denominator.valid())
    throw std::invalid_argument("empty expression in quotient");
  if (numerator.kind() == Kind::Constant &&
      denominator.kind() == Kind::Constant &&
      denominator.constant_value() != 0.0) {
    return Expr::constant(numerator.constant_value() /
                          denominator.constant_value());
  }
  if (denominator.is_constant(1.0)) return numerator;
  return make(Kind::Quotient, 0.0, -1, 0,
                   {std::move(numerator), std::move(denominator)});
}

Expr Expr::power(Expr base, unsigned exponent) {
  if (!base.valid()) throw std::invalid_argument("empty expression in power");
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  if (base.kind() == Kind::Constant) {
    double b = base.constant_value();
    double acc = 1.0;
    for (unsigned i = 0; i < exponent; ++i) acc *= b;
    return Expr::constant(acc);
  }
  return make(Kind::Power, 0.0, -1, exponent, {std::move(base)});
}

Expr Expr::apply(Kind function, Expr argument) {
  switch (function) {
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Exp:
    case Kind::Log:
    case Kind::Sqrt:
      break;
    default:
      throw std::invalid_argument("apply expects a function kind");
  }
  if (!argument.valid())
    throw std::invalid_argument("empty expression in function application");
  return make(function, 0.0, -1, 0, {std::move(argument)});
}

ParseError::ParseError(std::string message, std::size_t offset)
    : std::runtime_error(message + " (byte offset " + std::to_string(offset) +
                         ")"),
      offset_(offset) {}

namespace {

class Parser {
 public:
  Parser(std::string_view text, int ambient_dim)
      : text_(text), dim_(ambient_dim) {}

  Expr run() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) {
      throw ParseError("unexpected trailing input", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_expr() {
    skip_ws();
    bool lead_negative = false;
    if (consume('-')) {
      lead_negative = true;
    } else {
      consume('+');
    }
    std::vector<Expr> terms;
    Expr first = parse_term();
    terms.push_back(lead_negative ? Expr::negate(std::move(first))
                                  : std::move(first));
    for (;;) {
      if (consume('+')) {
        terms.push_back(parse_term());
      } else if (consume('-')) {
        terms.push_back(Expr::negate(parse_term()));
      } else {
        break;
      }
    }
    return Expr::sum(std::move(terms));
  }

  Expr parse_term() {
    std::vector<Expr> factors;
    factors.push_back(parse_factor());
    for (;;) {
      if (consume('*')) {
        factors.push_back(parse_factor());
      } else if (consume('/')) {
        Expr numerator = Expr::product(std::move(factors));
        Expr denominator = parse_factor();
        factors.clear();
        factors.push_back(
            Expr::quotient(std::move(numerator), std::move(denominator)));
      } else {
        break;
      }
    }
    return Expr::product(std::move(factors));
  }

  Expr parse_factor() {
    Expr base = parse_atom();
    if (consume('^')) {
      skip_ws();
      std::size_t at = pos_;
      if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
        throw ParseError("exponent must be an unsigned integer", at);
      }
      if (pos_ >= text_.size() ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError("expected integer exponent after '^'", at);
      }
      unsigned long long value = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        value = value * 10 + static_cast<unsigned>(text_[pos_] - '0');
        if (value > 1000000) {
          throw ParseError("exponent too large", at);
        }
        ++pos_;
      }
      if (pos_ < text_.size() && text_[pos_] == '.') {
        throw ParseError("fractional exponent not supported; use sqrt", pos_);
      }
      return Expr::power(std::move(base), static_cast<unsigned>(value));
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) {
      throw ParseError("unexpected end of input", pos_);
    }
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      if (!consume(')')) {
        throw ParseError("expected ')'", pos_);
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return parse_ident();
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      if (pos_ >= text_.size() ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError("expected digits after decimal point", pos_);
      }
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ >= text_.size() ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        pos_ = mark;  // 'e' belongs to something else; not our exponent
      } else {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
      }
    }
    double value = 0.0;
    auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (res.ec != std::errc()) {
      throw ParseError("malformed number literal", start);
    }
    return Expr::constant(value);
  }

  Expr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])))) {
      ++pos_;
    }
    std::string_view name = text_.substr(start, pos_ - start);
    if (name == "sin" || name == "cos" || name == "exp" || name == "log" ||
        name == "sqrt") {
      if (!consume('(')) {
        throw ParseError("expected '(' after function name", pos_);
      }
      Expr arg = parse_expr();
      if (!consume(')')) {
        throw ParseError("expected ')' closing function argument", pos_);
      }
      Expr::Kind k = Expr::Kind::Sin;
      if (name == "cos") k = Expr::Kind::Cos;
      if (name == "exp") k = Expr::Kind::Exp;
      if (name == "log") k = Expr::Kind::Log;
      if (name == "sqrt") k = Expr::Kind::Sqrt;
      return Expr::apply(k, std::move(arg));
    }
    int index = variable_index_for(name, start);
    return Expr::variable(index);
  }

  int variable_index_for(std::string_view name, std::size_t at) {
    if (dim_ <= 3) {
      if (name == "x") return 0;
      if (name == "y" && dim_ >= 2) return 1;
      if (name == "z" && dim_ >= 3) return 2;
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int idx = 0;
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(name[i]))) {
          digits = false;
          break;
        }
        idx = idx * 10 + (name[i] - '0');
      }
      if (digits) {
        if (idx < 1 || idx > dim_) {
          throw ParseError("variable '" + std::string(name) +
                               "' outside ambient dimension " +
                               std::to_string(dim_),
                           at);
        }
        return idx - 1;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", at);
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_formula(std::string_view text, int ambient_dim) {
  if (ambient_dim < 1) {
    throw std::invalid_argument("ambient dimension must be >= 1");
  }
  return Parser(text, ambient_dim).run();
}

Expr differentiate(const Expr& e, int var_index) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      return Expr::constant(0.0);
    case K::Variable:
      return Expr::constant(e.variable_index() == var_index ? 1.0 : 0.0);
    case K::Sum: {
      std::vector<Expr> terms;
      terms.reserve(e.children().size());
      for (const Expr& c : e.children()) {
        terms.push_back(differentiate(c, var_index));
      }
      return Expr::sum(std::move(terms));
    }
    case K::Product: {
      const auto& fs = e.children();
      std::vector<Expr> terms;
      terms.reserve(fs.size());
      for (std::size_t i = 0; i < fs.size(); ++i) {
        std::vector<Expr> factors;
        factors.reserve(fs.size());
        for (std::size_t j = 0; j < fs.size(); ++j) {
          factors.push_back(j == i ? differentiate(fs[j], var_index) : fs[j]);
        }
        terms.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(terms));
    }
    case K::Negate:
      return Expr::negate(differentiate(e.children().front(), var_index));
    case K::Quotient: {
      const Expr& a = e.children()[0];
      const Expr& b = e.children()[1];
      Expr da = differentiate(a, var_index);
      Expr db = differentiate(b, var_index);
      Expr numerator =
          Expr::sum({Expr::product({std::move(da), b}),
                     Expr::negate(Expr::product({a, std::move(db)}))});
      return Expr::quotient(std::move(numerator), Expr::power(b, 2));
    }
    case K::Power: {
      const Expr& base = e.children().front();
      unsigned k = e.exponent();
      Expr dbase = differentiate(base, var_index);
      return Expr::product({Expr::constant(static_cast<double>(k)),
                            Expr::power(base, k - 1), std::move(dbase)});
    }
    case K::Sin: {
      const Expr& a = e.children().front();
      return Expr::product(
          {differentiate(a, var_index), Expr::apply(K::Cos, a)});
    }
    case K::Cos: {
      const Expr& a = e.children().front();
      return Expr::negate(Expr::product(
          {differentiate(a, var_index), Expr::apply(K::Sin, a)}));
    }
    case K::Exp: {
      const Expr& a = e.children().front();
      return Expr::product({differentiate(a, var_index), e});
    }
    case K::Log: {
      const Expr& a = e.children().front();
      return Expr::quotient(differentiate(a, var_index), a);
    }
    case K::Sqrt: {
      const Expr& a = e.children().front();
      return Expr::quotient(
          differentiate(a, var_index),
          Expr::product({Expr::constant(2.0), e}));
    }
  }
  throw std::logic_error("unhandled expression kind in differentiate");
}

double eval_point(const Expr& e, std::span<const double> point) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant:
      return e.constant_value();
    case K::Variable: {
      int i = e.variable_index();
      if (i < 0 || static_cast<std::size_t>(i) >= point.size()) {
        throw EvalDomainError("variable index outside point dimension");
      }
      return point[static_cast<std::size_t>(i)];
    }
    case K::Sum: {
      double acc = 0.0;
      for (const Expr& c : e.children()) acc += eval_point(c, point);
      return acc;
    }
    case K::Product: {
      double acc = 1.0;
      for (const Expr& c : e.children()) acc *= eval_point(c, point);
      return acc;
    }
    case K::Negate:
      return -eval_point(e.children().front(), point);
    case K::Quotient: {
      double num = eval_point(e.children()[0], point);
      double den = eval_point(e.children()[1], point);
      if (den == 0.0) throw EvalDomainError("division by zero");
      return num / den;
    }
    case K::Power:
      return std::pow(eval_point(e.children().front(), point),
                      static_cast<double>(e.exponent()));
    case K::Sin:
      return std::sin(eval_point(e.children().front(), point));
    case K::Cos:
      return std::cos(eval_point(e.children().front(), point));
    case K::Exp:
      return std::exp(eval_point(e.children().front(), point));
    case K::Log: {
      double a = eval_point(e.children().front(), point);
      if (a <= 0.0) throw EvalDomainError("log of nonpositive value");
      return std::log(a);
    }
    case K::Sqrt: {
      double a = eval_point(e.children().front(), point);
      if (a < 0.0) throw EvalDomainError("sqrt of negative value");
      return std::sqrt(a);
    }
  }
  throw std::logic_error("unhandled expression kind in eval_point");
}

namespace {

// Precedence levels for printing: sum < product/quotient < power < atom.
enum Prec { kPrecSum = 0, kPrecProduct = 1, kPrecPower = 2, kPrecAtom = 3 };

std::string shortest_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void print_rec(const Expr& e, int parent_prec, std::string& out);

void print_wrapped(const Expr& e, int my_prec, int parent_prec,
                   const std::string& body, std::string& out) {
  (void)e;
  if (my_prec < parent_prec) {
    out += '(';
    out += body;
    out += ')';
  } else {
    out += body;
  }
}

void print_rec(const Expr& e, int parent_prec, std::string& out) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::Constant: {
      double v = e.constant_value();
      if (v < 0.0 && parent_prec > kPrecSum) {
        out += '(';
        out += shortest_double(v);
        out += ')';
      } else {
        out += shortest_double(v);
      }
      return;
    }
    case K::Variable:
      out += "x" + std::to_string(e.variable_index() + 1);
      return;
    case K::Sum: {
      std::string body;
      bool first = true;
      for (const Expr& c : e.children()) {
        if (c.kind() == K::Negate) {
          body += first ? "-" : " - ";
          print_rec(c.children().front(), kPrecProduct, body);
        } else if (c.kind() == K::Constant && c.constant_value() < 0.0 &&
                   !first) {
          body += " - ";
          body += shortest_double(-c.constant_value());
        } else {
          if (!first) body += " + ";
          print_rec(c, kPrecSum + 1, body);
        }
        first = false;
      }
      print_wrapped(e, kPrecSum, parent_prec, body, out);
      return;
    }
    case K::Product: {
      std::string body;
      bool first = true;
      for (const Expr& c : e.children()) {
        if (!first) body += "*";
        print_rec(c, kPrecProduct + 1, body);
        first = false;
      }
      print_wrapped(e, kPrecProduct, parent_prec, body, out);
      return;
    }
    case K::Negate: {
      std::string body = "-";
      print_rec(e.children().front(), kPrecProduct, body);
      print_wrapped(e, kPrecSum, parent_prec, body, out);
      return;
    }
    case K::Quotient: {
      std::string body;
      print_rec(e.children()[0], kPrecProduct + 1, body);
      body += "/";
      print_rec(e.children()[1], kPrecPower, body);
      print_wrapped(e, kPrecProduct, parent_prec, body, out);
      return;
    }
    case K::Power: {
      std::string body;
      print_rec(e.children().front(), kPrecAtom, body);
      body += "^" + std::to_string(e.exponent());
      print_wrapped(e, kPrecPower, parent_prec, body, out);
      return;
    }
    case K::Sin:
    case K::Cos:
    case K::Exp:
    case K::Log:
    case K::Sqrt: {
      const char* name = "sin";
      if (e.kind() == K::Cos) name = "cos";
      if (e.kind() == K::Exp) name = "exp";
      if (e.kind() == K::Log) name = "log";
      if (e.kind() == K::Sqrt) name = "sqrt";
      out += name;
      out += '(';
      print_rec(e.children().front(), kPrecSum, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_formula(const Expr& e) {
  std::string out;
  print_rec(e, kPrecSum, out);
  return out;
}

FunctionSystem::FunctionSystem(int ambient_dim, std::vector<Expr> functions)
    : ambient_dim_(ambient_dim), functions_(std::move(functions)) {
  if (ambient_dim_ < 1) {
    throw std::invalid_argument("ambient dimension must be >= 1");
  }
  if (functions_.empty()) {
    throw std::invalid_argument("function system must be nonempty");
  }
  if (static_cast<int>(functions_.size()) > ambient_dim_) {
    throw std::invalid_argument(
        "function count exceeds ambient dimension (k <= N required)");
  }
  gradients_.reserve(functions_.size());
  hessians_.reserve(functions_.size());
  for (const Expr& f : functions_) {
    std::vector<Expr> grad;
    grad.reserve(ambient_dim_);
    for (int j = 0; j < ambient_dim_; ++j) {
      grad.push_back(differentiate(f, j));
    }
    std::vector<std::vector<Expr>> hess;
    hess.reserve(ambient_dim_);
    for (int j = 0; j < ambient_dim_; ++j) {
      std::vector<Expr> row;
      row.reserve(ambient_dim_);
      for (int l = 0; l < ambient_dim_; ++l) {
        row.push_back(differentiate(grad[j], l));
      }
      hess.push_back(std::move(row));
    }
    gradients_.push_back(std::move(grad));
    hessians_.push_back(std::move(hess));
  }
}

}  // namespace reachcert
