#pragma once

// Arithmetic expressions in one variable y: the input language for model
// coefficients (drift, vol-of-vol, asset volatility map). Immutable ASTs
// with exact structural equality, symbolic differentiation and a printer
// whose output re-parses to the same tree.

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace svol {

enum class ExprKind {
  Literal,
  Var,      // the variable y
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,      // constant real exponent only
  Sqrt,
  Exp,
  Log,
  Abs,
};

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double value = 0.0;   // Literal payload, or Pow exponent
  ExprPtr a, b;
};

class ExprError : public std::runtime_error {
 public:
  enum class Kind { Domain, Overflow };
  ExprError(Kind k, std::string msg, double y)
      : std::runtime_error(std::move(msg)), kind(k), y(y) {}
  Kind kind;
  double y;   // evaluation point that triggered the failure
};

// Value-semantic handle. Construction goes through the combinators below,
// which apply safe constant folding (literal-literal arithmetic, additive
// and multiplicative identities, literal negation).
class Expr {
 public:
  Expr() = default;
  explicit Expr(ExprPtr n) : node_(std::move(n)) {}

  static Expr literal(double v);
  static Expr var();

  const ExprNode& node() const { return *node_; }
  const ExprPtr& ptr() const { return node_; }
  bool valid() const { return node_ != nullptr; }

  bool operator==(const Expr& o) const;
  bool operator!=(const Expr& o) const { return !(*this == o); }

  // Throws ExprError on domain violations (log/negative-power at 0,
  // sqrt of negative, division by zero) and on overflow to infinity.
  double eval(double y) const;

  // Total on the grammar; d|x| is represented as x/|x| * dx.
  Expr differentiate() const;

  // parse(print(e)) is structurally equal to e.
  std::string print() const;

  bool contains_abs() const;

 private:
  ExprPtr node_;
};

Expr neg(Expr a);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr base, double exponent);
Expr sqrt(Expr a);
Expr exp(Expr a);
Expr log(Expr a);
Expr abs(Expr a);

struct ParseDiagnostic {
  std::size_t position = 0;   // character offset, <= input length
  std::string message;
  std::vector<std::string> expected;
};

struct ParseResult {
  std::optional<Expr> expr;
  std::optional<ParseDiagnostic> error;
  bool ok() const { return expr.has_value(); }
};

ParseResult parse(std::string_view text);

// Convenience for trusted inputs; throws std::invalid_argument with the
// diagnostic message on failure.
Expr parse_or_throw(std::string_view text);

}  // namespace svol
