#include "svol/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace svol {

namespace {

ExprPtr make(ExprKind k, double v, ExprPtr a = nullptr, ExprPtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->value = v;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_lit(const Expr& e, double* out = nullptr) {
  if (!e.valid() || e.node().kind != ExprKind::Literal) return false;
  if (out) *out = e.node().value;
  return true;
}

bool lit_eq(const Expr& e, double v) {
  double x;
  return is_lit(e, &x) && x == v;
}

}  // namespace

Expr Expr::literal(double v) { return Expr(make(ExprKind::Literal, v)); }
Expr Expr::var() { return Expr(make(ExprKind::Var, 0.0)); }

Expr neg(Expr a) {
  double v;
  if (is_lit(a, &v)) return Expr::literal(-v);
  return Expr(make(ExprKind::Neg, 0.0, a.ptr()));
}

Expr add(Expr a, Expr b) {
  double x, y;
  if (is_lit(a, &x) && is_lit(b, &y) && std::isfinite(x + y)) return Expr::literal(x + y);
  if (lit_eq(a, 0.0)) return b;
  if (lit_eq(b, 0.0)) return a;
  return Expr(make(ExprKind::Add, 0.0, a.ptr(), b.ptr()));
}

Expr sub(Expr a, Expr b) {
  double x, y;
  if (is_lit(a, &x) && is_lit(b, &y) && std::isfinite(x - y)) return Expr::literal(x - y);
  if (lit_eq(b, 0.0)) return a;
  return Expr(make(ExprKind::Sub, 0.0, a.ptr(), b.ptr()));
}

Expr mul(Expr a, Expr b) {
  double x, y;
  if (is_lit(a, &x) && is_lit(b, &y) && std::isfinite(x * y)) return Expr::literal(x * y);
  if (lit_eq(a, 1.0)) return b;
  if (lit_eq(b, 1.0)) return a;
  // 0-absorption treats the dropped factor as total; only derivative
  // construction relies on it and coefficients live on y > 0 anyway.
  if (lit_eq(a, 0.0) || lit_eq(b, 0.0)) return Expr::literal(0.0);
  return Expr(make(ExprKind::Mul, 0.0, a.ptr(), b.ptr()));
}

Expr div(Expr a, Expr b) {
  double x, y;
  if (is_lit(a, &x) && is_lit(b, &y) && y != 0.0 && std::isfinite(x / y))
    return Expr::literal(x / y);
  if (lit_eq(b, 1.0)) return a;
  return Expr(make(ExprKind::Div, 0.0, a.ptr(), b.ptr()));
}

Expr pow(Expr base, double exponent) {
  double x;
  if (exponent == 1.0) return base;
  if (is_lit(base, &x)) {
    double r = std::pow(x, exponent);
    if (std::isfinite(r)) return Expr::literal(r);
  }
  return Expr(make(ExprKind::Pow, exponent, base.ptr()));
}

Expr sqrt(Expr a) {
  double x;
  if (is_lit(a, &x) && x >= 0.0) return Expr::literal(std::sqrt(x));
  return Expr(make(ExprKind::Sqrt, 0.0, a.ptr()));
}

Expr exp(Expr a) {
  double x;
  if (is_lit(a, &x) && std::isfinite(std::exp(x))) return Expr::literal(std::exp(x));
  return Expr(make(ExprKind::Exp, 0.0, a.ptr()));
}

Expr log(Expr a) {
  double x;
  if (is_lit(a, &x) && x > 0.0) return Expr::literal(std::log(x));
  return Expr(make(ExprKind::Log, 0.0, a.ptr()));
}

Expr abs(Expr a) {
  double x;
  if (is_lit(a, &x)) return Expr::literal(std::abs(x));
  return Expr(make(ExprKind::Abs, 0.0, a.ptr()));
}

bool Expr::operator==(const Expr& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  const ExprNode& l = *node_;
  const ExprNode& r = *o.node_;
  if (l.kind != r.kind || l.value != r.value) return false;
  Expr la(l.a), ra(r.a), lb(l.b), rb(r.b);
  if ((l.a == nullptr) != (r.a == nullptr)) return false;
  if ((l.b == nullptr) != (r.b == nullptr)) return false;
  if (l.a && !(Expr(l.a) == Expr(r.a))) return false;
  if (l.b && !(Expr(l.b) == Expr(r.b))) return false;
  return true;
}

namespace {

double eval_node(const ExprNode& n, double y) {
  auto check = [&](double r) -> double {
    if (std::isnan(r))
      throw ExprError(ExprError::Kind::Domain, "evaluation produced NaN", y);
    if (std::isinf(r))
      throw ExprError(ExprError::Kind::Overflow, "evaluation overflowed", y);
    return r;
  };
  switch (n.kind) {
    case ExprKind::Literal: return n.value;
    case ExprKind::Var: return y;
    case ExprKind::Neg: return -eval_node(*n.a, y);
    case ExprKind::Add: return check(eval_node(*n.a, y) + eval_node(*n.b, y));
    case ExprKind::Sub: return check(eval_node(*n.a, y) - eval_node(*n.b, y));
    case ExprKind::Mul: return check(eval_node(*n.a, y) * eval_node(*n.b, y));
    case ExprKind::Div: {
      double num = eval_node(*n.a, y), den = eval_node(*n.b, y);
      if (den == 0.0)
        throw ExprError(ExprError::Kind::Domain, "division by zero", y);
      return check(num / den);
    }
    case ExprKind::Pow: {
      double base = eval_node(*n.a, y);
      if (base < 0.0 && n.value != std::floor(n.value))
        throw ExprError(ExprError::Kind::Domain,
                        "negative base with non-integer exponent", y);
      if (base == 0.0 && n.value < 0.0)
        throw ExprError(ExprError::Kind::Domain, "zero base with negative exponent", y);
      return check(std::pow(base, n.value));
    }
    case ExprKind::Sqrt: {
      double x = eval_node(*n.a, y);
      if (x < 0.0) throw ExprError(ExprError::Kind::Domain, "sqrt of negative value", y);
      return std::sqrt(x);
    }
    case ExprKind::Exp: return check(std::exp(eval_node(*n.a, y)));
    case ExprKind::Log: {
      double x = eval_node(*n.a, y);
      if (x <= 0.0) throw ExprError(ExprError::Kind::Domain, "log of non-positive value", y);
      return std::log(x);
    }
    case ExprKind::Abs: return std::abs(eval_node(*n.a, y));
  }
  throw std::logic_error("unreachable expression kind");
}

Expr diff_node(const ExprNode& n) {
  Expr a(n.a), b(n.b);
  switch (n.kind) {
    case ExprKind::Literal: return Expr::literal(0.0);
    case ExprKind::Var: return Expr::literal(1.0);
    case ExprKind::Neg: return neg(a.differentiate());
    case ExprKind::Add: return add(a.differentiate(), b.differentiate());
    case ExprKind::Sub: return sub(a.differentiate(), b.differentiate());
    case ExprKind::Mul:
      return add(mul(a.differentiate(), b), mul(a, b.differentiate()));
    case ExprKind::Div:
      return div(sub(mul(a.differentiate(), b), mul(a, b.differentiate())),
                 mul(b, b));
    case ExprKind::Pow:
      return mul(mul(Expr::literal(n.value), pow(a, n.value - 1.0)),
                 a.differentiate());
    case ExprKind::Sqrt:
      return div(a.differentiate(), mul(Expr::literal(2.0), sqrt(a)));
    case ExprKind::Exp: return mul(exp(a), a.differentiate());
    case ExprKind::Log: return div(a.differentiate(), a);
    case ExprKind::Abs:
      return mul(div(a, abs(a)), a.differentiate());
  }
  throw std::logic_error("unreachable expression kind");
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Precedence: Add/Sub = 1, Mul/Div = 2, unary minus = 3, Pow = 4, atoms = 5.
// Negative literals print with a leading '-', so they rank as unary minus.
int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Literal: return std::signbit(n.value) ? 3 : 5;
    default: return 5;
  }
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& c, int min_prec, std::string& out) {
  bool parens = precedence(c) < min_prec;
  // a negative literal prints with a leading '-', which re-parses as a
  // folded unary minus over the magnitude; no parens needed at the
  // precedence levels where the printer emits it.
  if (parens) out.push_back('(');
  print_node(c, out);
  if (parens) out.push_back(')');
}

void print_node(const ExprNode& n, std::string& out) {
  switch (n.kind) {
    case ExprKind::Literal: out += format_double(n.value); return;
    case ExprKind::Var: out.push_back('y'); return;
    case ExprKind::Neg:
      out.push_back('-');
      print_child(*n.a, 3, out);
      return;
    case ExprKind::Add:
      print_child(*n.a, 1, out);
      out.push_back('+');
      print_child(*n.b, 2, out);
      return;
    case ExprKind::Sub:
      print_child(*n.a, 1, out);
      out.push_back('-');
      print_child(*n.b, 2, out);
      return;
    case ExprKind::Mul:
      print_child(*n.a, 2, out);
      out.push_back('*');
      print_child(*n.b, 3, out);
      return;
    case ExprKind::Div:
      print_child(*n.a, 2, out);
      out.push_back('/');
      print_child(*n.b, 3, out);
      return;
    case ExprKind::Pow:
      print_child(*n.a, 5, out);
      out.push_back('^');
      if (n.value < 0) {
        out.push_back('(');
        out += format_double(n.value);
        out.push_back(')');
      } else {
        out += format_double(n.value);
      }
      return;
    case ExprKind::Sqrt: out += "sqrt("; print_node(*n.a, out); out.push_back(')'); return;
    case ExprKind::Exp: out += "exp("; print_node(*n.a, out); out.push_back(')'); return;
    case ExprKind::Log: out += "log("; print_node(*n.a, out); out.push_back(')'); return;
    case ExprKind::Abs: out += "abs("; print_node(*n.a, out); out.push_back(')'); return;
  }
}

bool contains_abs_node(const ExprNode& n) {
  if (n.kind == ExprKind::Abs) return true;
  if (n.a && contains_abs_node(*n.a)) return true;
  if (n.b && contains_abs_node(*n.b)) return true;
  return false;
}

}  // namespace

double Expr::eval(double y) const { return eval_node(*node_, y); }
Expr Expr::differentiate() const { return diff_node(*node_); }

std::string Expr::print() const {
  std::string out;
  print_node(*node_, out);
  return out;
}

bool Expr::contains_abs() const { return node_ && contains_abs_node(*node_); }

// ---------------------------------------------------------------------------
// Recursive-descent parser. Grammar (standard precedence, ^ right-assoc with
// constant exponents, which all fold to a single literal):
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?        -- exponent subtree must be constant
//   atom   := number | 'y' | '(' expr ')' | func '(' expr ')'
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  std::string_view s;
  std::size_t pos = 0;

  struct Fail {
    ParseDiagnostic diag;
  };

  [[noreturn]] void fail(std::string msg, std::vector<std::string> expected = {}) {
    ParseDiagnostic d;
    d.position = std::min(pos, s.size());
    d.message = std::move(msg);
    d.expected = std::move(expected);
    throw Fail{std::move(d)};
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (eat('+')) lhs = add(lhs, parse_term());
      else if (eat('-')) lhs = sub(lhs, parse_term());
      else return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (eat('*')) lhs = mul(lhs, parse_unary());
      else if (eat('/')) lhs = div(lhs, parse_unary());
      else return lhs;
    }
  }

  Expr parse_unary() {
    if (eat('-')) return neg(parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (eat('^')) {
      std::size_t at = pos;
      Expr e = parse_unary();   // right-associative; must fold to a literal
      if (e.node().kind != ExprKind::Literal) {
        pos = at;
        fail("exponent must be a numeric constant", {"number"});
      }
      return pow(base, e.node().value);
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input", {"number", "y", "(", "function"});
    char c = s[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      if (!eat(')')) fail("unbalanced parenthesis", {")"});
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
    fail(std::string("unexpected character '") + c + "'",
         {"number", "y", "(", "function"});
  }

  Expr parse_number() {
    const char* begin = s.data() + pos;
    const char* end = s.data() + s.size();
    double v = 0.0;
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{}) fail("malformed number", {"number"});
    pos = static_cast<std::size_t>(res.ptr - s.data());
    return Expr::literal(v);
  }

  Expr parse_ident() {
    std::size_t start = pos;
    while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
    std::string_view id = s.substr(start, pos - start);
    if (id == "y") return Expr::var();
    if (id == "sqrt" || id == "exp" || id == "log" || id == "abs") {
      if (!eat('(')) fail("expected '(' after function name", {"("});
      Expr arg = parse_expr();
      if (!eat(')')) fail("unbalanced parenthesis", {")"});
      if (id == "sqrt") return sqrt(arg);
      if (id == "exp") return exp(arg);
      if (id == "log") return log(arg);
      return abs(arg);
    }
    pos = start;
    fail("unknown identifier '" + std::string(id) + "'", {"y", "sqrt", "exp", "log", "abs"});
  }
};

}  // namespace

ParseResult parse(std::string_view text) {
  Parser p{text};
  ParseResult r;
  try {
    Expr e = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input after expression");
    r.expr = e;
  } catch (const Parser::Fail& f) {
    r.error = f.diag;
  }
  return r;
}

Expr parse_or_throw(std::string_view text) {
  ParseResult r = parse(text);
  if (!r.ok()) {
    std::ostringstream os;
    os << "parse error at offset " << r.error->position << ": " << r.error->message;
    throw std::invalid_argument(os.str());
  }
  return *r.expr;
}

}  // namespace svol
