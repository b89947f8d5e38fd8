#pragma once

// Shared test helpers: independent oracles (finite differences, a
// Black-Scholes formula, a normal-CDF inverter by bisection) and a random
// expression generator for property tests. Everything here is deliberately
// independent of the implementation paths it checks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "svol/expr.hpp"

namespace testsup {

// central finite difference, step h = 1e-5 * max(1, |y|)
inline double fd_derivative(const std::function<double(double)>& f, double y) {
  const double h = 1e-5 * std::max(1.0, std::abs(y));
  return (f(y + h) - f(y - h)) / (2.0 * h);
}

inline double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// zero-rate Black-Scholes call
inline double bs_call(double x, double k, double vol, double t) {
  if (t <= 0.0 || vol <= 0.0) return std::max(x - k, 0.0);
  const double sd = vol * std::sqrt(t);
  const double d1 = (std::log(x / k) + 0.5 * sd * sd) / sd;
  return x * norm_cdf(d1) - k * norm_cdf(d1 - sd);
}

inline double bs_put(double x, double k, double vol, double t) {
  // put-call parity at zero rate
  return bs_call(x, k, vol, t) - x + k;
}

// invert the normal CDF by bisection on erfc: independent of the
// implementation's rational approximations. The upper tail goes through the
// lower tail by symmetry, where erfc keeps relative accuracy (1 - u is
// exact for u >= 0.5 by Sterbenz).
inline double inv_norm_bisect(double u) {
  if (u > 0.5) return -inv_norm_bisect(1.0 - u);
  double lo = -40.0, hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (norm_cdf(mid) < u) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Random expression trees over the full grammar. Growth is kept tame so the
// finite-difference oracle stays well conditioned: exp arguments are scaled
// down and nesting of exp is avoided.
class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  svol::Expr gen(int max_depth) { return gen_node(max_depth, /*exp_budget=*/1); }

 private:
  std::mt19937_64 rng_;

  double gen_literal() {
    static const double pool[] = {0.3, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 0.25, 0.75, 4.0};
    std::uniform_int_distribution<int> d(0, 9);
    return pool[d(rng_)];
  }

  svol::Expr gen_node(int depth, int exp_budget) {
    std::uniform_int_distribution<int> leaf(0, 2);
    if (depth <= 0) {
      return leaf(rng_) == 0 ? svol::Expr::literal(gen_literal()) : svol::Expr::var();
    }
    std::uniform_int_distribution<int> pick(0, 10);
    switch (pick(rng_)) {
      case 0: return svol::Expr::literal(gen_literal());
      case 1: return svol::Expr::var();
      case 2: return svol::neg(gen_node(depth - 1, exp_budget));
      case 3:
        return svol::add(gen_node(depth - 1, exp_budget), gen_node(depth - 1, exp_budget));
      case 4:
        return svol::sub(gen_node(depth - 1, exp_budget), gen_node(depth - 1, exp_budget));
      case 5:
        return svol::mul(gen_node(depth - 1, exp_budget), gen_node(depth - 1, exp_budget));
      case 6:
        return svol::div(gen_node(depth - 1, exp_budget),
                         svol::add(svol::abs(gen_node(depth - 1, 0)),
                                   svol::Expr::literal(0.5)));
      case 7: {
        static const double exps[] = {0.5, 1.5, 2.0, 3.0, -1.0, -0.5};
        std::uniform_int_distribution<int> d(0, 5);
        return svol::pow(svol::add(svol::abs(gen_node(depth - 1, 0)),
                                   svol::Expr::literal(0.25)),
                         exps[d(rng_)]);
      }
      case 8:
        return svol::sqrt(svol::add(svol::abs(gen_node(depth - 1, exp_budget)),
                                    svol::Expr::literal(0.1)));
      case 9:
        if (exp_budget > 0)
          return svol::exp(svol::mul(svol::Expr::literal(0.1),
                                     gen_node(depth - 1, exp_budget - 1)));
        return svol::Expr::var();
      default:
        return svol::log(svol::add(svol::abs(gen_node(depth - 1, exp_budget)),
                                   svol::Expr::literal(0.5)));
    }
  }
};

}  // namespace testsup
