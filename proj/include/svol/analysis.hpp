#pragma once

// Headline orchestration: martingale classification of the asset price,
// the uniqueness verdict it implies for a given payoff, the construction of
// the second solution u + eta * defect when uniqueness fails, and
// PDE-vs-Monte-Carlo cross validation.

#include <optional>
#include <string>

#include "svol/feller.hpp"
#include "svol/grid.hpp"
#include "svol/mc.hpp"
#include "svol/model.hpp"
#include "svol/payoff.hpp"
#include "svol/pde.hpp"

namespace svol::analysis {

enum class MartingaleVerdict { Martingale, StrictLocalMartingale, Inconclusive };
enum class UniquenessVerdict { Unique, NonUnique, Inconclusive };

const char* to_string(MartingaleVerdict v);
const char* to_string(UniquenessVerdict v);

struct ClassificationReport {
  MartingaleVerdict martingale = MartingaleVerdict::Inconclusive;
  UniquenessVerdict uniqueness = UniquenessVerdict::Inconclusive;
  double eta = 0.0;
  std::string reason;
  feller::FellerReport explosion;        // auxiliary diffusion at +inf
  model::ZeroBoundaryClass boundary;     // volatility process at 0
};

// The martingale verdict holds uniformly in (y, T); no horizon is accepted.
ClassificationReport classify(const model::ModelSpec& spec, const payoff::Payoff& g,
                              double feller_c = 1.0, double tol = 1e-6);

struct DemoGridParams {
  std::size_t nx = 160;
  std::size_t ny = 160;         // 2D y nodes (the survival grid extends past them)
  std::size_t n_steps = 200;
  double x_eval = 1.0;
  double y_eval = 1.0;
  double T = 1.0;
  double x_max_mult = 20.0;     // x_max = mult * max(x_eval, strikes)
  double barrier = 1e4;         // explosion proxy for the survival solve
  double gap_threshold = 1e-3;  // relative to x_eval
};

struct NonUniquenessDemo {
  bool refused = false;
  std::string refusal_reason;

  double eta = 0.0;
  double residual_u_l2 = 0.0;
  double residual_w_l2 = 0.0;
  double residual_u_max = 0.0;
  double residual_w_max = 0.0;
  bool residual_parity = false;        // l2(w) <= 3 l2(u)
  double initial_gap_max = 0.0;        // max |w - u| at T = 0 (exact zero)
  bool initial_agreement = false;
  double domination_violation = 0.0;   // max(w - h, -w) over nodes
  double truncation_budget = 0.0;
  bool domination_ok = false;
  double gap_at_eval = 0.0;            // eta * x_eval * (1 - I(y_eval, T))
  double max_gap = 0.0;                // max nodewise gap
  bool gap_significant = false;        // gap_at_eval >= threshold * x_eval
  bool marginal = false;               // distinct but below the threshold
  bool all_checks_pass = false;

  grid::FieldSeries u;
  grid::FieldSeries w;
  grid::ProfileSeries survival;
};

NonUniquenessDemo demo_nonuniqueness(const model::ModelSpec& spec,
                                     const payoff::Payoff& g,
                                     const DemoGridParams& params, double tol = 1e-6);

struct CrossValidation {
  double pde_value = 0.0;
  double pde_error_estimate = 0.0;    // coarse-vs-fine difference at the point
  double mc_mean = 0.0;
  double mc_std_error = 0.0;
  double mc_bias_estimate = 0.0;      // half-step-count rerun difference
  double discrepancy = 0.0;
  double tolerance = 0.0;             // 3 * (mc_se + mc_bias + pde_err)
  bool pass = false;
};

struct XValGridParams {
  std::size_t nx = 200;
  std::size_t ny = 100;
  std::size_t n_steps = 200;
  double x_max_mult = 20.0;
  double y_max_mult = 50.0;    // y_max = mult * y_eval (conservative far field)
};

CrossValidation cross_validate(const model::ModelSpec& spec, const payoff::Payoff& g,
                               double x0, double y0, double T,
                               const XValGridParams& gp, const mc::MCConfig& cfg,
                               double feller_c = 1.0, double tol = 1e-6);

// Shared helpers used by the CLI runner and the acceptance suite.

// Builds the valuation grid (anchors at strikes and the evaluation point).
grid::Grid make_valuation_grid(const payoff::Payoff& g, double x_eval, double y_eval,
                               double x_max, double y_max, std::size_t nx,
                               std::size_t ny, std::size_t n_steps, double T);

// Survival profile and the matching 2D domain for a model whose auxiliary
// diffusion explodes. The profile is solved on a y grid that extends the 2D
// nodes geometrically up to the explosion-proxy barrier (Dirichlet 0); the
// 2D domain is truncated where survival drops below ~2% so the valuation
// solver is never asked to resolve the runaway-coefficient zone, and its
// top boundary takes the asymptote g(0) + eta x I from the shared profile.
// The profile is solved on a 4x refinement (in y and time) of that grid and
// restricted back, so the defect assembled from it carries discretization
// error well below the valuation solver's own.
struct ExplosiveSetup {
  std::vector<double> y_nodes;        // 2D y nodes; node j = fine node 4 j
  std::vector<double> coarse_extended;   // y_nodes plus the extension to the barrier
  grid::ProfileSeries profile;        // fine y grid, one level per 2D time step
  std::size_t fine_stride = 4;
  double survival_at(std::size_t time_index, std::size_t coarse_j) const {
    return profile.levels[time_index][fine_stride * coarse_j];
  }
};

ExplosiveSetup build_explosive_setup(const model::ModelSpec& spec, double y_eval,
                                     std::size_t ny, std::size_t n_steps, double T,
                                     double barrier);

// Valuation solve with the far-field closure implied by the classification:
// conservative d2/dy2 = 0 for martingale models (setup == nullptr),
// survival-asymptote Dirichlet for explosive ones.
grid::FieldSeries valuation_with_closure(const model::ModelSpec& spec,
                                         const payoff::Payoff& g, const grid::Grid& gr,
                                         model::BoundaryKind boundary,
                                         const ExplosiveSetup* setup);

}  // namespace svol::analysis
