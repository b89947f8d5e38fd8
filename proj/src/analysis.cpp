#include "svol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svol::analysis {

const char* to_string(MartingaleVerdict v) {
  switch (v) {
    case MartingaleVerdict::Martingale: return "Martingale";
    case MartingaleVerdict::StrictLocalMartingale: return "StrictLocalMartingale";
    case MartingaleVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* to_string(UniquenessVerdict v) {
  switch (v) {
    case UniquenessVerdict::Unique: return "Unique";
    case UniquenessVerdict::NonUnique: return "NonUnique";
    case UniquenessVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

ClassificationReport classify(const model::ModelSpec& spec, const payoff::Payoff& g,
                              double feller_c, double tol) {
  ClassificationReport rep;
  const Expr mu_t = model::auxiliary_drift(spec);
  rep.explosion = feller::test_explosion_at_infinity(mu_t, spec.sigma, feller_c, tol);
  rep.boundary = model::classify_zero_boundary(spec, feller_c, tol);
  rep.eta = payoff::eta(g);

  switch (rep.explosion.verdict) {
    case feller::Verdict::Finite:
      rep.martingale = MartingaleVerdict::StrictLocalMartingale;
      break;
    case feller::Verdict::Infinite:
      rep.martingale = MartingaleVerdict::Martingale;
      break;
    case feller::Verdict::Inconclusive:
      rep.martingale = MartingaleVerdict::Inconclusive;
      break;
  }

  if (rep.eta == 0.0) {
    rep.uniqueness = UniquenessVerdict::Unique;
    rep.reason = "strictly sublinear payoff growth: the value function is the unique "
                 "solution regardless of the martingale property";
  } else if (rep.martingale == MartingaleVerdict::Martingale) {
    rep.uniqueness = UniquenessVerdict::Unique;
    rep.reason = "asset price is a martingale: unique solution within the "
                 "linear-growth class";
  } else if (rep.martingale == MartingaleVerdict::StrictLocalMartingale) {
    rep.uniqueness = UniquenessVerdict::NonUnique;
    rep.reason = "asset price is a strict local martingale and the payoff has linear "
                 "growth: the value function and its defect shift both solve the "
                 "equation";
  } else {
    rep.uniqueness = UniquenessVerdict::Inconclusive;
    rep.reason = "explosion test inconclusive: " + rep.explosion.note;
  }
  return rep;
}

namespace {

std::vector<double> make_x_nodes(const payoff::Payoff& g, double x_eval, double x_max,
                                 std::size_t nx) {
  const std::vector<double> kinks = payoff::kink_locations(g);
  const double focus = kinks.empty() ? std::max(x_eval, x_max / 100.0) : kinks.front();
  std::vector<double> x =
      grid::sinh_nodes_around(x_max, nx, focus, std::max(focus / 5.0, x_max / 200.0));
  std::vector<double> anchors = kinks;
  anchors.push_back(x_eval);
  grid::snap_anchors(x, anchors);
  return x;
}

std::vector<double> make_y_nodes(double y_eval, double y_max, std::size_t ny) {
  std::vector<double> y =
      grid::sinh_nodes_from_zero(y_max, ny, std::max(y_eval, y_max * 1e-4) / 8.0);
  grid::snap_anchors(y, {y_eval});
  return y;
}

}  // namespace

grid::Grid make_valuation_grid(const payoff::Payoff& g, double x_eval, double y_eval,
                               double x_max, double y_max, std::size_t nx,
                               std::size_t ny, std::size_t n_steps, double T) {
  grid::Grid gr;
  gr.x = make_x_nodes(g, x_eval, x_max, nx);
  gr.y = make_y_nodes(y_eval, y_max, ny);
  gr.T = T;
  gr.dt = T / static_cast<double>(n_steps);
  gr.validate();
  return gr;
}

ExplosiveSetup build_explosive_setup(const model::ModelSpec& spec, double y_eval,
                                     std::size_t ny, std::size_t n_steps, double T,
                                     double barrier) {
  const double dt = T / static_cast<double>(n_steps);

  // probe pass on a fixed barrier grid to locate where survival at the
  // horizon falls below 2%; resolution-independent so refinement reruns
  // share the same truncation point
  const std::vector<double> y_probe = make_y_nodes(y_eval, barrier, 160);
  const grid::ProfileSeries probe =
      pde::solve_survival(spec, y_probe, T / 200.0, T, pde::ProfileFarField::AbsorbZero);
  double y_top = barrier;
  const auto& last = probe.levels.back();
  for (std::size_t j = 0; j < y_probe.size(); ++j) {
    if (y_probe[j] >= 4.0 * y_eval && last[j] <= 0.02) {
      y_top = std::min(barrier, 1.3 * y_probe[j]);
      break;
    }
  }

  // final grid: sinh nodes on [0, y_top] (the 2D domain) extended
  // geometrically up to the barrier for the survival solve
  ExplosiveSetup setup;
  setup.y_nodes = make_y_nodes(y_eval, y_top, ny);
  std::vector<double> extended = setup.y_nodes;
  double step = (setup.y_nodes.back() - setup.y_nodes[setup.y_nodes.size() - 2]);
  double y = y_top;
  while (y < barrier) {
    step *= 1.12;
    y = std::min(barrier, y + step);
    extended.push_back(y);
  }

  setup.coarse_extended = extended;

  // refine 4x in y and time, solve, restrict to the base time levels
  const std::size_t stride = setup.fine_stride;
  std::vector<double> fine;
  fine.reserve((extended.size() - 1) * stride + 1);
  for (std::size_t j = 0; j + 1 < extended.size(); ++j) {
    for (std::size_t s = 0; s < stride; ++s)
      fine.push_back(extended[j] +
                     (extended[j + 1] - extended[j]) * double(s) / double(stride));
  }
  fine.push_back(extended.back());
  const grid::ProfileSeries fine_series = pde::solve_survival(
      spec, fine, dt / double(stride), T, pde::ProfileFarField::AbsorbZero);
  setup.profile.y = fine;
  setup.profile.max_range_violation = fine_series.max_range_violation;
  for (std::size_t n = 0; n < fine_series.levels.size(); n += stride) {
    setup.profile.times.push_back(fine_series.times[n]);
    setup.profile.levels.push_back(fine_series.levels[n]);
  }
  return setup;
}

grid::FieldSeries valuation_with_closure(const model::ModelSpec& spec,
                                         const payoff::Payoff& g, const grid::Grid& gr,
                                         model::BoundaryKind boundary,
                                         const ExplosiveSetup* setup) {
  pde::ValuationOptions opt;
  opt.boundary = boundary;
  if (setup) {
    const double eta_g = payoff::eta(g);
    const double g0 = g(0.0);
    const double y_top = gr.y.back();
    const grid::ProfileSeries* profile = &setup->profile;
    opt.far_field = pde::YFarField::Dirichlet;
    opt.top_value = [profile, eta_g, g0, y_top](double x, double tau) {
      return g0 + eta_g * x * profile->interpolate(y_top, tau);
    };
  }
  return pde::solve_valuation(spec, g, gr, opt);
}

NonUniquenessDemo demo_nonuniqueness(const model::ModelSpec& spec,
                                     const payoff::Payoff& g,
                                     const DemoGridParams& params, double tol) {
  NonUniquenessDemo demo;
  const ClassificationReport cls = classify(spec, g, 1.0, tol);
  demo.eta = cls.eta;
  if (cls.martingale == MartingaleVerdict::Martingale) {
    demo.refused = true;
    demo.refusal_reason =
        "model is a martingale: the defect vanishes and the construction is vacuous";
    return demo;
  }
  if (cls.martingale == MartingaleVerdict::Inconclusive) {
    demo.refused = true;
    demo.refusal_reason = "martingale classification inconclusive: " + cls.explosion.note;
    return demo;
  }
  if (!(cls.eta > 0.0)) {
    demo.refused = true;
    demo.refusal_reason = "payoff has strictly sublinear growth (eta = 0): uniqueness "
                          "holds and no second solution exists";
    return demo;
  }
  if (!cls.boundary.kind) {
    demo.refused = true;
    demo.refusal_reason = "zero-boundary classification inconclusive";
    return demo;
  }

  double strike_max = params.x_eval;
  for (double k : payoff::kink_locations(g)) strike_max = std::max(strike_max, k);
  const double x_max = params.x_max_mult * strike_max;

  auto solve_u = [&](std::size_t nx, std::size_t ny, std::size_t n_steps,
                     ExplosiveSetup& setup_out) {
    setup_out =
        build_explosive_setup(spec, params.y_eval, ny, n_steps, params.T, params.barrier);
    grid::Grid gr;
    gr.x = make_x_nodes(g, params.x_eval, x_max, nx);
    gr.y = setup_out.y_nodes;
    gr.T = params.T;
    gr.dt = params.T / static_cast<double>(n_steps);
    gr.validate();
    return valuation_with_closure(spec, g, gr, *cls.boundary.kind, &setup_out);
  };

  ExplosiveSetup setup;
  demo.u = solve_u(params.nx, params.ny, params.n_steps, setup);
  demo.survival = setup.profile;
  const grid::Grid& gr = demo.u.grid;
  const std::size_t nx = gr.nx(), ny = gr.ny();

  // w = u + eta * x * (1 - I): exact algebra, the survival grid shares the
  // first ny nodes with the valuation grid
  demo.w.grid = gr;
  demo.w.times = demo.u.times;
  demo.w.levels.resize(demo.u.levels.size());
  for (std::size_t n = 0; n < demo.u.levels.size(); ++n) {
    demo.w.levels[n].v.resize(nx * ny);
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        demo.w.levels[n].v[gr.idx(i, j)] =
            demo.u.levels[n].v[gr.idx(i, j)] +
            demo.eta * pde::defect(setup.survival_at(n, j), gr.x[i]);
  }

  // (1) residual parity
  const pde::ResidualReport ru = pde::residual(spec, demo.u);
  const pde::ResidualReport rw = pde::residual(spec, demo.w);
  demo.residual_u_l2 = ru.l2;
  demo.residual_w_l2 = rw.l2;
  demo.residual_u_max = ru.max_abs;
  demo.residual_w_max = rw.max_abs;
  demo.residual_parity = rw.l2 <= 3.0 * ru.l2;

  // (2) initial agreement is exact: I(y, 0) = 1
  demo.initial_gap_max = 0.0;
  for (std::size_t id = 0; id < nx * ny; ++id)
    demo.initial_gap_max = std::max(
        demo.initial_gap_max,
        std::abs(demo.w.levels[0].v[id] - demo.u.levels[0].v[id]));
  demo.initial_agreement = demo.initial_gap_max == 0.0;

  // (3) growth domination 0 <= w <= h within a discretization budget: a
  // Richardson-style max-norm self-convergence estimate over the whole
  // domain (violations live at the survival front, so probing a few points
  // would underestimate) plus a far-field shift from doubling the 2D
  // truncation height
  {
    const payoff::Majorant maj = payoff::concave_majorant(g);
    double viol = 0.0;
    for (std::size_t n = 0; n < demo.w.levels.size(); ++n) {
      for (std::size_t i = 0; i < nx; ++i) {
        const double hx = maj.h(gr.x[i]);
        for (std::size_t j = 0; j < ny; ++j) {
          const double wv = demo.w.levels[n].v[gr.idx(i, j)];
          viol = std::max(viol, std::max(wv - hx, -wv));
        }
      }
    }
    demo.domination_violation = viol;

    ExplosiveSetup setup2;
    const grid::FieldSeries u2 =
        solve_u(params.nx / 2, params.ny / 2,
                std::max<std::size_t>(params.n_steps / 2, 8), setup2);
    double self_conv = 0.0;
    for (std::size_t n2 = 1; n2 < u2.levels.size(); ++n2) {
      const double tau = u2.times[n2];
      for (std::size_t i2 = 0; i2 < u2.grid.nx(); ++i2)
        for (std::size_t j2 = 0; j2 < u2.grid.ny(); ++j2)
          self_conv = std::max(
              self_conv,
              std::abs(u2.levels[n2].v[u2.grid.idx(i2, j2)] -
                       demo.u.interpolate(u2.grid.x[i2], u2.grid.y[j2], tau)));
    }

    ExplosiveSetup setup3 = build_explosive_setup(
        spec, params.y_eval, params.ny / 2,
        std::max<std::size_t>(params.n_steps / 2, 8), params.T, params.barrier);
    // force a taller 2D domain by reusing the coarse extension nodes
    {
      std::vector<double> taller = setup3.y_nodes;
      const double target = 2.0 * gr.y.back();
      for (std::size_t j = setup3.y_nodes.size(); j < setup3.coarse_extended.size();
           ++j) {
        if (setup3.coarse_extended[j] > target) break;
        taller.push_back(setup3.coarse_extended[j]);
      }
      setup3.y_nodes = taller;
    }
    grid::Grid gr3;
    gr3.x = make_x_nodes(g, params.x_eval, x_max, params.nx / 2);
    gr3.y = setup3.y_nodes;
    gr3.T = params.T;
    gr3.dt = params.T / std::max<double>(params.n_steps / 2, 8);
    gr3.validate();
    const grid::FieldSeries u3 =
        valuation_with_closure(spec, g, gr3, *cls.boundary.kind, &setup3);
    double top_shift = 0.0;
    for (double xf : {0.5, 1.0, 2.0, 4.0})
      for (double yf : {0.5, 1.0, 2.0})
        top_shift = std::max(
            top_shift,
            std::abs(u2.interpolate(params.x_eval * xf, params.y_eval * yf, gr.T) -
                     u3.interpolate(params.x_eval * xf, params.y_eval * yf, gr.T)));

    demo.truncation_budget =
        2.0 * self_conv + top_shift + 1e-9 * std::max(1.0, params.x_eval);
    demo.domination_ok = viol <= demo.truncation_budget;
  }

  // (4) the two solutions are genuinely distinct
  const std::size_t last = demo.u.levels.size() - 1;
  demo.gap_at_eval = demo.eta * params.x_eval *
                     (1.0 - demo.survival.at_time_index(last, params.y_eval));
  for (std::size_t j = 0; j < ny; ++j)
    demo.max_gap =
        std::max(demo.max_gap,
                 demo.eta * gr.x.back() * (1.0 - setup.survival_at(last, j)));
  demo.gap_significant = demo.gap_at_eval >= params.gap_threshold * params.x_eval;
  demo.marginal = !demo.gap_significant && demo.gap_at_eval > 0.0;

  demo.all_checks_pass = demo.residual_parity && demo.initial_agreement &&
                         demo.domination_ok && demo.gap_significant;
  return demo;
}

CrossValidation cross_validate(const model::ModelSpec& spec, const payoff::Payoff& g,
                               double x0, double y0, double T,
                               const XValGridParams& gp, const mc::MCConfig& cfg,
                               double feller_c, double tol) {
  CrossValidation xv;
  const ClassificationReport cls = classify(spec, g, feller_c, tol);
  if (!cls.boundary.kind)
    throw std::runtime_error("cross validation blocked: zero-boundary class "
                             "inconclusive (supply an override)");
  const bool explosive = cls.martingale == MartingaleVerdict::StrictLocalMartingale;

  double strike_max = x0;
  for (double k : payoff::kink_locations(g)) strike_max = std::max(strike_max, k);

  auto solve_at = [&](std::size_t nx, std::size_t ny, std::size_t nsteps) {
    grid::Grid gr;
    gr.x = make_x_nodes(g, x0, gp.x_max_mult * strike_max, nx);
    gr.T = T;
    gr.dt = T / static_cast<double>(nsteps);
    if (explosive) {
      ExplosiveSetup setup = build_explosive_setup(
          spec, y0, ny, nsteps, T, std::max(1e4, 100.0 * std::max(1.0, y0)));
      gr.y = setup.y_nodes;
      gr.validate();
      const grid::FieldSeries u =
          valuation_with_closure(spec, g, gr, *cls.boundary.kind, &setup);
      return u.interpolate(x0, y0, T);
    }
    gr.y = make_y_nodes(y0, gp.y_max_mult * std::max(y0, 0.02), ny);
    gr.validate();
    const grid::FieldSeries u =
        valuation_with_closure(spec, g, gr, *cls.boundary.kind, nullptr);
    return u.interpolate(x0, y0, T);
  };

  xv.pde_value = solve_at(gp.nx, gp.ny, gp.n_steps);
  const double coarse = solve_at(gp.nx / 2, gp.ny / 2, gp.n_steps / 2);
  xv.pde_error_estimate = std::abs(xv.pde_value - coarse);

  const mc::Estimate est = mc::price(spec, *cls.boundary.kind, g, x0, y0, T, cfg);
  xv.mc_mean = est.mean;
  xv.mc_std_error = est.std_error;
  // the Euler scheme's weak bias, estimated by a half-step-count rerun
  mc::MCConfig half = cfg;
  half.n_steps = std::max(1, cfg.n_steps / 2);
  const mc::Estimate est_half =
      mc::price(spec, *cls.boundary.kind, g, x0, y0, T, half);
  xv.mc_bias_estimate = std::abs(est.mean - est_half.mean);
  xv.discrepancy = std::abs(xv.pde_value - est.mean);
  xv.tolerance = 3.0 * (est.std_error + xv.mc_bias_estimate + xv.pde_error_estimate);
  xv.pass = xv.discrepancy <= xv.tolerance;
  return xv;
}

}  // namespace svol::analysis
