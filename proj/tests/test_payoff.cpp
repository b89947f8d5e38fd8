#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "svol/payoff.hpp"

using namespace svol::payoff;

TEST_CASE("builtin evaluation") {
  CHECK(call(1.0)(1.5) == 0.5);
  CHECK(call(1.0)(0.5) == 0.0);
  CHECK(put(2.0)(3.0) == 0.0);
  CHECK(put(2.0)(0.5) == 1.5);
  CHECK(identity()(7.0) == 7.0);
  CHECK(constant(3.0)(123.0) == 3.0);
  CHECK(digital(1.0, 2.0)(1.5) == 2.0);
  CHECK(digital(1.0, 2.0)(0.5) == 0.0);
}

TEST_CASE("majorants of the builtins") {
  // call: h(x) = x, eta = 1 (super-replication by the asset)
  {
    Majorant m = concave_majorant(call(1.0));
    CHECK(m.eta == 1.0);
    for (double x : {0.0, 0.5, 1.0, 3.0, 10.0})
      CHECK(m.h(x) == doctest::Approx(x).epsilon(1e-14));
  }
  // put(K): h = K
  {
    Majorant m = concave_majorant(put(2.0));
    CHECK(m.eta == 0.0);
    for (double x : {0.0, 1.0, 2.0, 5.0}) CHECK(m.h(x) == 2.0);
  }
  // digital(K, c): h = min(c x / K, c)
  {
    Majorant m = concave_majorant(digital(2.0, 3.0));
    CHECK(m.eta == 0.0);
    for (double x : {0.1, 0.5, 1.0, 1.9, 2.0, 4.0})
      CHECK(m.h(x) == doctest::Approx(std::min(3.0 * x / 2.0, 3.0)).epsilon(1e-6));
  }
  // identity: h = x
  {
    Majorant m = concave_majorant(identity());
    CHECK(m.eta == 1.0);
    CHECK(m.h(5.0) == 5.0);
  }
}

TEST_CASE("eta examples") {
  CHECK(eta(identity()) == 1.0);
  CHECK(eta(put(1.0)) == 0.0);
  CHECK(eta(piecewise_linear({{0.0, 1.0}, {1.0, 2.0}}, 0.4)) == 0.4);
}

namespace {

Payoff random_payoff(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> npts(1, 6);
  std::uniform_real_distribution<double> dx(0.1, 2.0), dg(0.0, 3.0), ds(0.0, 2.0);
  std::vector<Breakpoint> pts{{0.0, dg(rng)}};
  const int n = npts(rng);
  for (int i = 0; i < n; ++i) pts.push_back({pts.back().x + dx(rng), dg(rng)});
  return piecewise_linear(pts, ds(rng));
}

}  // namespace

TEST_CASE("majorant properties on random piecewise payoffs") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 300; ++trial) {
    const Payoff g = random_payoff(rng);
    const Majorant m = concave_majorant(g);

    // eta(g) = eta(h), exact in this class
    CHECK(m.eta == g.terminal_slope);
    CHECK(m.h.terminal_slope == g.terminal_slope);

    // domination on breakpoints and a dense grid
    const double x_hi = g.pts.back().x * 1.5 + 1.0;
    for (const Breakpoint& p : g.pts) CHECK(m.h(p.x) >= p.g - 1e-12);
    for (double x = 0.0; x <= x_hi; x += x_hi / 257.0)
      CHECK(m.h(x) >= g(x) - 1e-12);

    // nondecreasing segments, concave chain (slopes nonincreasing)
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < m.h.pts.size(); ++i) {
      const double sl = (m.h.pts[i].g - m.h.pts[i - 1].g) /
                        (m.h.pts[i].x - m.h.pts[i - 1].x);
      CHECK(sl >= -1e-12);
      CHECK(sl <= prev_slope + 1e-12);
      prev_slope = sl;
    }
    if (!m.h.pts.empty()) CHECK(m.h.terminal_slope <= prev_slope + 1e-12);

    // growth constant: h(x) <= M (1 + x) on the grid
    for (double x = 0.0; x <= x_hi; x += x_hi / 101.0)
      CHECK(m.h(x) <= m.growth_constant * (1.0 + x) + 1e-9);

    // minimality: every hull vertex touches g, so lowering it breaks
    // domination there
    for (const Breakpoint& v : m.h.pts)
      CHECK(std::abs(v.g - g(v.x)) <= 1e-12 * (1.0 + std::abs(v.g)));
  }
}

TEST_CASE("second divided differences of h are nonpositive") {
  std::mt19937_64 rng(321);
  for (int trial = 0; trial < 100; ++trial) {
    const Majorant m = concave_majorant(random_payoff(rng));
    const auto& p = m.h.pts;
    for (std::size_t i = 1; i + 1 < p.size(); ++i) {
      const double d1 = (p[i].g - p[i - 1].g) / (p[i].x - p[i - 1].x);
      const double d2 = (p[i + 1].g - p[i].g) / (p[i + 1].x - p[i].x);
      CHECK(d2 <= d1 + 1e-12);
    }
  }
}

TEST_CASE("payoff validation") {
  CHECK_THROWS(piecewise_linear({{0.5, 1.0}}, 0.0));            // must start at 0
  CHECK_THROWS(piecewise_linear({{0.0, -1.0}}, 0.0));           // nonnegative
  CHECK_THROWS(piecewise_linear({{0.0, 1.0}, {0.0, 2.0}}, 0.0));  // strict x
  CHECK_THROWS(piecewise_linear({{0.0, 1.0}}, -0.5));           // slope >= 0
}
