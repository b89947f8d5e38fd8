#include "svol/kernels/tape.hpp"

#include <stdexcept>

namespace svol::kern {

namespace {

std::uint16_t emit(const ExprNode& n, Tape& t) {
  auto alloc = [&t]() -> std::uint16_t {
    if (t.n_slots == UINT16_MAX) throw std::length_error("expression too large for tape");
    return t.n_slots++;
  };
  switch (n.kind) {
    case ExprKind::Literal: {
      const std::uint16_t d = alloc();
      t.code.push_back({Op::Const, d, 0, 0, n.value});
      return d;
    }
    case ExprKind::Var: {
      const std::uint16_t d = alloc();
      t.code.push_back({Op::LoadY, d, 0, 0, 0.0});
      return d;
    }
    case ExprKind::Neg:
    case ExprKind::Sqrt:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Abs: {
      const std::uint16_t a = emit(*n.a, t);
      const std::uint16_t d = alloc();
      Op op = Op::Neg;
      if (n.kind == ExprKind::Sqrt) op = Op::Sqrt;
      else if (n.kind == ExprKind::Exp) op = Op::Exp;
      else if (n.kind == ExprKind::Log) op = Op::Log;
      else if (n.kind == ExprKind::Abs) op = Op::Abs;
      t.code.push_back({op, d, a, 0, 0.0});
      return d;
    }
    case ExprKind::Pow: {
      const std::uint16_t a = emit(*n.a, t);
      const std::uint16_t d = alloc();
      t.code.push_back({Op::Pow, d, a, 0, n.value});
      return d;
    }
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: {
      const std::uint16_t a = emit(*n.a, t);
      const std::uint16_t b = emit(*n.b, t);
      const std::uint16_t d = alloc();
      Op op = Op::Add;
      if (n.kind == ExprKind::Sub) op = Op::Sub;
      else if (n.kind == ExprKind::Mul) op = Op::Mul;
      else if (n.kind == ExprKind::Div) op = Op::Div;
      t.code.push_back({op, d, a, b, 0.0});
      return d;
    }
  }
  throw std::logic_error("unreachable expression kind");
}

}  // namespace

Tape compile(const Expr& e) {
  Tape t;
  t.out = emit(e.node(), t);
  return t;
}

}  // namespace svol::kern
