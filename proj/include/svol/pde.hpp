#pragma once

// Finite-difference solvers for the valuation equation
//   dv/dT = mu(y) dv/dy + (1/2) b(y)^2 x^2 d2v/dx2 + (1/2) sigma(y)^2 d2v/dy2
//           + rho b(y) sigma(y) x d2v/dxdy,   v(x,y,0) = g(x)
// (Douglas ADI, implicit x and y sweeps, explicit mixed term, upwinded
// drift) and for the 1D survival profile of the auxiliary diffusion
//   dI/dT = (1/2) sigma^2 d2I/dy2 + (mu + rho b sigma) dI/dy,  I(y,0) = 1
// whose complement yields the martingale defect x (1 - I).
//
// Boundary handling:
//   x = 0      Dirichlet g(0) (the price process is absorbed at 0)
//   x = x_max  d2v/dx2 = 0 (asymptotically linear far field)
//   y = 0      degenerate transport dv/dT = mu(0) dv/dy (unattainable or
//              reflecting boundary), Dirichlet v = g(x) when absorbing
//   y = y_max  d2/dy2 = 0 by default; for models whose auxiliary diffusion
//              explodes, a Dirichlet closure (survival-profile asymptote)
//              must be used instead or no probability mass can leave the
//              truncated domain.

#include <functional>
#include <optional>

#include "svol/grid.hpp"
#include "svol/model.hpp"
#include "svol/payoff.hpp"

namespace svol::pde {

struct CoefficientTuple {
  double a_xx, a_yy, a_xy, b_y;
};

// a_xx = b^2 x^2 / 2, a_yy = sigma^2 / 2, a_xy = rho b sigma x, b_y = mu
CoefficientTuple generator_coeffs(const model::ModelSpec& spec, double x, double y);

enum class YFarField { SecondDerivZero, Dirichlet };

struct ValuationOptions {
  model::BoundaryKind boundary = model::BoundaryKind::Unattainable;
  YFarField far_field = YFarField::SecondDerivZero;
  // value at y = y_max as a function of (x, time-to-maturity); required for
  // the Dirichlet far field
  std::function<double(double, double)> top_value;
  double theta = 0.5;          // Douglas implicitness
  int rannacher_steps = 2;     // fully implicit startup steps
};

// Runs n_steps = grid.T/grid.dt Douglas steps and returns every time level.
// Throws on instability (values exceeding 10x the payoff majorant).
grid::FieldSeries solve_valuation(const model::ModelSpec& spec,
                                  const payoff::Payoff& g, const grid::Grid& grid,
                                  const ValuationOptions& opt);

enum class ProfileFarField { SecondDerivZero, AbsorbZero };

// Implicit (backward Euler) solve of the survival-profile equation on the
// given y nodes. AbsorbZero treats y_max as an explosion proxy barrier
// (Dirichlet 0), mirroring the Monte Carlo barrier construction.
grid::ProfileSeries solve_survival(const model::ModelSpec& spec,
                                   const std::vector<double>& y_nodes, double dt,
                                   double T, ProfileFarField far_field);

// martingale defect: x (1 - I)
inline double defect(double I_value, double x) { return x * (1.0 - I_value); }

struct ResidualReport {
  double max_abs = 0.0;
  double l2 = 0.0;             // RMS over sampled interior nodes and levels
  int levels_used = 0;
  grid::Field mid_level;       // residual field at a representative level
};

// A-posteriori residual dv/dT - Lv via central differences in space and
// time, over interior nodes (2-node margin) and the later 90% of the time
// levels (the payoff kink pollutes the first few).
ResidualReport residual(const model::ModelSpec& spec, const grid::FieldSeries& series);

// same residual measure for a 1D profile series (survival equation)
double residual_profile_l2(const model::ModelSpec& spec,
                           const grid::ProfileSeries& series);

}  // namespace svol::pde
