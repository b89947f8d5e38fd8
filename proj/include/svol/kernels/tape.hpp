#pragma once

// Coefficient expressions compiled to a flat register tape so the Monte
// Carlo inner loop can evaluate them over whole path batches. The tape is a
// post-order linearization of the AST; executing it slot by slot performs
// exactly the same floating-point operations in the same order as the tree
// interpreter, which keeps tape results bit-identical to Expr::eval away
// from domain errors (the tape does not throw; IEEE semantics propagate).

#include <cstdint>
#include <vector>

#include "svol/expr.hpp"

namespace svol::kern {

enum class Op : std::uint8_t {
  Const,
  LoadY,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,   // imm = exponent
  Sqrt,
  Exp,
  Log,
  Abs,
};

struct Instr {
  Op op;
  std::uint16_t dst = 0;
  std::uint16_t a = 0;
  std::uint16_t b = 0;
  double imm = 0.0;
};

struct Tape {
  std::vector<Instr> code;
  std::uint16_t n_slots = 0;
  std::uint16_t out = 0;

  std::size_t scratch_doubles(std::size_t block) const {
    return static_cast<std::size_t>(n_slots) * block;
  }
};

Tape compile(const Expr& e);

}  // namespace svol::kern
