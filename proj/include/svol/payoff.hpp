#pragma once

// European payoffs g on [0, inf) and their smallest concave nondecreasing
// majorant h. Payoffs are piecewise linear (builtins included), so h is
// computed exactly by an upper-hull pass plus the terminal ray; its
// asymptotic slope eta = lim g(x)/x separates linear-growth payoffs
// (uniqueness can fail) from strictly sublinear ones (it cannot).

#include <string>
#include <vector>

namespace svol::payoff {

struct Breakpoint {
  double x;
  double g;
};

// Piecewise linear, continuous, nonnegative payoff: linear interpolation
// between breakpoints, ray of slope terminal_slope >= 0 past the last one.
// First breakpoint sits at x = 0.
struct Payoff {
  std::vector<Breakpoint> pts;
  double terminal_slope = 0.0;
  std::string name;

  double operator()(double x) const;
};

Payoff call(double strike);
Payoff put(double strike);
// Idealized digital is discontinuous at the strike; represented as a ramp of
// width 1e-6 * strike to stay inside the continuous payoff class.
Payoff digital(double strike, double cash);
Payoff identity();
Payoff constant(double c);
Payoff piecewise_linear(std::vector<Breakpoint> pts, double terminal_slope,
                        std::string name = "piecewise");

struct Majorant {
  Payoff h;            // the majorant, same representation
  double eta = 0.0;    // asymptotic slope, equals terminal slope of h
  double growth_constant = 0.0;   // smallest M with h(x) <= M(1+x)
};

// Exact smallest concave nondecreasing function dominating g.
Majorant concave_majorant(const Payoff& g);

// limsup g(x)/x; exact for this payoff class.
double eta(const Payoff& g);

// Strikes / kink locations, used to anchor PDE grid nodes.
std::vector<double> kink_locations(const Payoff& g);

}  // namespace svol::payoff
