#pragma once

// Monte Carlo engine: full-truncation Euler for (Y, log S/x) under the
// pricing dynamics, adaptive-step simulation of the auxiliary diffusion for
// explosion probabilities, and a local-martingale drift diagnostic for
// candidate value functions. Paths are a pure function of (seed, path
// index, step index) through the counter-based generator, so results are
// bit-reproducible and independent of the thread count; reductions use
// fixed-order pairwise summation.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "svol/expr.hpp"
#include "svol/grid.hpp"
#include "svol/model.hpp"
#include "svol/payoff.hpp"

namespace svol::mc {

struct MCConfig {
  std::int64_t n_paths = 10000;
  int n_steps = 100;
  std::uint64_t seed = 0;
  std::vector<double> barrier_levels;   // explosion detection levels
  bool antithetic = false;
  int n_threads = 0;                    // 0 = hardware concurrency
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_effective = 0;
};

struct TerminalEnsemble {
  std::vector<double> y;
  std::vector<double> log_growth;   // log(S_T / x)
};

// Euler-Maruyama with full truncation; boundary handling per the zero
// boundary class (Absorbing freezes at 0, otherwise clamp).
TerminalEnsemble simulate_terminal(const model::ModelSpec& spec,
                                   model::BoundaryKind boundary, double y0, double T,
                                   const MCConfig& cfg);

struct PathEnsemble {
  std::vector<double> t;
  // one row per stored path
  std::vector<std::vector<double>> y;
  std::vector<std::vector<double>> log_growth;
};

// Trajectories of the first `max_stored` paths (same draws as
// simulate_terminal for those indices).
PathEnsemble simulate_paths(const model::ModelSpec& spec, model::BoundaryKind boundary,
                            double y0, double T, const MCConfig& cfg,
                            std::size_t max_stored);

Estimate price(const model::ModelSpec& spec, model::BoundaryKind boundary,
               const payoff::Payoff& g, double x0, double y0, double T,
               const MCConfig& cfg);

struct ExplosionEstimate {
  Estimate prob;                       // extrapolated across the top barriers
  double extrapolation_error = 0.0;    // included in prob.std_error
  std::vector<double> barriers;
  std::vector<double> hit_fraction;    // per barrier
  bool monotone = true;                // hitting fractions decreased with level
  std::int64_t censored_paths = 0;     // hit the substep cap before T
};

// P[the diffusion dX = drift dt + sigma dB explodes by T], estimated from
// barrier hitting with step halving whenever the state doubles, and
// Aitken extrapolation across the top three barrier levels.
ExplosionEstimate explosion_probability(const Expr& drift, const Expr& sigma, double y0,
                                        double T, const MCConfig& cfg);

struct DriftDiagnostic {
  double drift_per_time = 0.0;     // mean increment of v(S,Y,T-t) per unit time
  double std_error = 0.0;
  double clamped_fraction = 0.0;   // lookups outside the field's grid
  bool supermartingale_like = false;
  std::int64_t n_paths = 0;
};

// Tests whether t -> v(S_t, Y_t, T - t) is drift-free along simulated paths.
DriftDiagnostic local_martingale_diagnostic(const model::ModelSpec& spec,
                                            model::BoundaryKind boundary,
                                            const grid::FieldSeries& v, double x0,
                                            double y0, double T, const MCConfig& cfg);

// fixed-order pairwise sum, independent of threading
double pairwise_sum(const double* v, std::size_t n);

Estimate summarize(const std::vector<double>& samples, bool antithetic);

}  // namespace svol::mc
