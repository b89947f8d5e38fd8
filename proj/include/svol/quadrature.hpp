#pragma once

// Adaptive Gauss-Kronrod 7/15 quadrature, in linear and in log domain.
// The log-domain variant integrates exp(g) given only g and never
// materializes values outside double range; scale-function work is built
// on it because the integrands there routinely span thousands of orders
// of magnitude.

#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace svol::quad {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(std::string msg, double a, double b)
      : std::runtime_error(std::move(msg)), a(a), b(b) {}
  double a, b;   // offending subinterval
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int panels = 0;
  bool converged = false;
};

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = 1e-12, double rel_tol = 1e-10,
                     int max_panels = 10000);

struct LogQuadResult {
  double log_value = -std::numeric_limits<double>::infinity();
  double rel_error = 0.0;   // abs_error / value, in linear scale
  int panels = 0;
  bool converged = false;
};

// Integral of exp(log_f) over [a, b]; result reported as its logarithm.
LogQuadResult integrate_exp(const std::function<double(double)>& log_f, double a,
                            double b, double rel_tol = 1e-10, int max_panels = 10000);

// Memoized cumulative integral F(x) = int_c^x f, for x, c > 0, evaluated
// through the substitution xi = e^u so that endpoint behavior near zero is
// regularized. Queries extend from the nearest previously computed
// checkpoint. Internally synchronized.
class Cumulative {
 public:
  Cumulative(std::function<double(double)> f, double c, double rel_tol = 1e-10);
  double operator()(double x) const;
  double base() const { return c_; }

 private:
  std::function<double(double)> f_;
  double c_;
  double rel_tol_;
  mutable std::map<double, double> memo_;   // u = log(x)  ->  F(x)
  mutable std::mutex mu_;
};

// Memoized log-cumulative integral: log of int over [min(c,x), max(c,x)] of
// exp(g), same substitution and memoization scheme. The two directions keep
// independent checkpoint chains anchored at c.
class LogCumulative {
 public:
  LogCumulative(std::function<double(double)> log_f, double c, double rel_tol = 1e-10);
  // log | int_c^x exp(g) |  (always the log of a nonnegative quantity)
  double log_abs(double x) const;
  double base() const { return c_; }

 private:
  double extend(std::map<double, double>& chain, double u_target, bool upward) const;
  std::function<double(double)> log_f_;
  double c_;
  double rel_tol_;
  mutable std::map<double, double> up_, down_;   // u -> log integral from log(c)
  mutable std::mutex mu_;
};

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

}  // namespace svol::quad
