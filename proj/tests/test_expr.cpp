#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "svol/expr.hpp"
#include "test_support.hpp"

using namespace svol;

TEST_CASE("parse shapes") {
  // sqrt(y) -> single call
  Expr e = parse_or_throw("sqrt(y)");
  CHECK(e.node().kind == ExprKind::Sqrt);
  CHECK(e.node().a->kind == ExprKind::Var);

  // precedence: 0.5 - 2*y
  e = parse_or_throw("0.5 - 2*y");
  CHECK(e.node().kind == ExprKind::Sub);
  CHECK(e.node().a->kind == ExprKind::Literal);
  CHECK(e.node().a->value == 0.5);
  CHECK(e.node().b->kind == ExprKind::Mul);
  CHECK(e.node().b->a->value == 2.0);
  CHECK(e.node().b->b->kind == ExprKind::Var);

  // constant exponent
  e = parse_or_throw("y^1.5");
  CHECK(e.node().kind == ExprKind::Pow);
  CHECK(e.node().value == 1.5);
  CHECK(e.node().a->kind == ExprKind::Var);

  // ^ binds tighter than unary minus, which binds tighter than *
  e = parse_or_throw("-y^2");
  CHECK(e.node().kind == ExprKind::Neg);
  CHECK(e.node().a->kind == ExprKind::Pow);
  e = parse_or_throw("-2*y");
  CHECK(e.node().kind == ExprKind::Mul);
  CHECK(e.node().a->value == -2.0);
}

TEST_CASE("parse diagnostics") {
  ParseResult r = parse("sqrt(y");
  REQUIRE(!r.ok());
  CHECK(r.error->position <= 6);

  r = parse("2*z");
  REQUIRE(!r.ok());
  CHECK(r.error->message.find("unknown identifier") != std::string::npos);

  r = parse("y^y");
  REQUIRE(!r.ok());
  CHECK(r.error->message.find("constant") != std::string::npos);

  r = parse("1 + ");
  REQUIRE(!r.ok());
  CHECK(r.error->position <= 4);
}

TEST_CASE("eval basics") {
  CHECK(parse_or_throw("sqrt(y)").eval(4.0) == 2.0);
  CHECK(parse_or_throw("0.3 - 2*y").eval(0.0) == 0.3);
  CHECK(parse_or_throw("y*exp(y)").eval(1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  CHECK(parse_or_throw("y^(-1)").eval(4.0) == 0.25);
}

TEST_CASE("eval domain errors") {
  CHECK_THROWS_AS(parse_or_throw("log(y)").eval(0.0), ExprError);
  CHECK_THROWS_AS(parse_or_throw("1/y").eval(0.0), ExprError);
  CHECK_THROWS_AS(parse_or_throw("y^(-0.5)").eval(0.0), ExprError);
  CHECK_THROWS_AS(parse_or_throw("sqrt(0-y)").eval(1.0), ExprError);
  // overflow is signaled, never silently saturated
  CHECK_THROWS_AS(parse_or_throw("exp(exp(y))").eval(10.0), ExprError);
}

TEST_CASE("derivative examples") {
  Expr d = parse_or_throw("y^2").differentiate();
  CHECK(d.eval(3.0) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(parse_or_throw("sqrt(y)").differentiate().eval(4.0) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // d/dy (y e^y) at 1 = 2e
  CHECK(parse_or_throw("y*exp(y)").differentiate().eval(1.0) ==
        doctest::Approx(2.0 * std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("print examples") {
  CHECK(svol::pow(Expr::var(), 1.5).print() == "y^1.5");
  CHECK(mul(Expr::literal(2.0), Expr::var()).print() == "2*y");
  const Expr e = parse_or_throw("0.3-2*y+sqrt(y)");
  CHECK(parse_or_throw(e.print()) == e);
}

TEST_CASE("round-trip property over random trees") {
  testsup::ExprGen gen(20260810);
  for (int trial = 0; trial < 500; ++trial) {
    const Expr e = gen.gen(6);
    const std::string s = e.print();
    ParseResult r = parse(s);
    REQUIRE_MESSAGE(r.ok(), "failed to reparse: ", s);
    CHECK_MESSAGE(*r.expr == e, "round-trip mismatch: ", s, " -> ", r.expr->print());
  }
}

TEST_CASE("derivative matches finite differences on random trees") {
  testsup::ExprGen gen(99);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ypick(0.1, 10.0);
  int checked_points = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = gen.gen(5);
    Expr d;
    try {
      d = e.differentiate();
    } catch (const std::exception&) {
      continue;
    }
    for (int k = 0; k < 20; ++k) {
      const double y = ypick(rng);
      double fd, sym;
      try {
        auto f = [&](double v) { return e.eval(v); };
        // oracle conditioning check: two step sizes must agree
        const double fd1 = testsup::fd_derivative(f, y);
        const double h2 = 2e-5 * std::max(1.0, std::abs(y));
        const double fd2 = (f(y + h2) - f(y - h2)) / (2.0 * h2);
        if (std::abs(fd1 - fd2) > 1e-7 * std::max(1.0, std::abs(fd1))) continue;
        if (std::abs(fd1) > 1e8) continue;
        fd = fd1;
        sym = d.eval(y);
      } catch (const ExprError&) {
        continue;   // point outside the common domain
      }
      CHECK_MESSAGE(std::abs(sym - fd) <= 1e-6 * std::max(1.0, std::abs(sym)),
                    "expr ", e.print(), " at y=", y, ": sym=", sym, " fd=", fd);
      ++checked_points;
    }
  }
  CHECK(checked_points > 2000);   // the filters must not hollow the test out
}

TEST_CASE("evaluation totality: no silent NaN") {
  testsup::ExprGen gen(4242);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ypick(0.0, 5.0);
  for (int trial = 0; trial < 400; ++trial) {
    const Expr e = gen.gen(5);
    const double y = ypick(rng);
    try {
      const double v = e.eval(y);
      CHECK(!std::isnan(v));
      CHECK(std::isfinite(v));
    } catch (const ExprError&) {
      // signaled: fine
    }
  }
}
