#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "svol/kernels/dispatch.hpp"
#include "svol/mc.hpp"
#include "test_support.hpp"

using namespace svol;
using model::BoundaryKind;
using model::ModelSpec;

namespace {

ModelSpec make_model(const char* mu, const char* sigma, const char* b, double rho,
                     const char* name) {
  ModelSpec m;
  m.mu = parse_or_throw(mu);
  m.sigma = parse_or_throw(sigma);
  m.b = parse_or_throw(b);
  m.rho = rho;
  m.name = name;
  return m;
}

ModelSpec heston() {
  return make_model("0.3-2*y", "0.4*sqrt(y)", "sqrt(y)", -0.5, "heston");
}

// strongly explosive Wiggins-type model: auxiliary drift rho*b*sigma = y^2
ModelSpec explosive() { return make_model("0", "2*y", "y", 0.5, "explosive"); }

}  // namespace

TEST_CASE("frozen-volatility limit matches the lognormal law") {
  // vol-of-vol ~ 0: log growth is Normal(-b^2(y0) T / 2, b^2(y0) T)
  const ModelSpec m =
      make_model("0", "0.000001*y", "sqrt(y)", 0.0, "frozen");
  mc::MCConfig cfg;
  cfg.n_paths = 100000;
  cfg.n_steps = 50;
  cfg.seed = 11;
  const double y0 = 0.04, T = 1.0;
  const mc::TerminalEnsemble ens =
      mc::simulate_terminal(m, BoundaryKind::Unattainable, y0, T, cfg);

  const double n = static_cast<double>(cfg.n_paths);
  double mean = mc::pairwise_sum(ens.log_growth.data(), ens.log_growth.size()) / n;
  std::vector<double> sq(cfg.n_paths);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double d = ens.log_growth[i] - mean;
    sq[i] = d * d;
  }
  const double var = mc::pairwise_sum(sq.data(), sq.size()) / (n - 1.0);

  const double want_mean = -0.5 * y0 * T;
  const double want_var = y0 * T;
  CHECK(std::abs(mean - want_mean) <= 3.0 * std::sqrt(want_var / n));
  CHECK(std::abs(var - want_var) <= 3.0 * want_var * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("absorbed start stays frozen") {
  const ModelSpec m = make_model("-2*y", "0.4*sqrt(y)", "sqrt(y)", 0.0, "absorbing");
  mc::MCConfig cfg;
  cfg.n_paths = 500;
  cfg.n_steps = 20;
  cfg.seed = 3;
  const mc::TerminalEnsemble ens =
      mc::simulate_terminal(m, BoundaryKind::Absorbing, 0.0, 1.0, cfg);
  for (std::int64_t i = 0; i < cfg.n_paths; ++i) {
    CHECK(ens.y[i] == 0.0);
    CHECK(ens.log_growth[i] == 0.0);
  }
}

TEST_CASE("zero correlation leaves the drivers uncorrelated") {
  const ModelSpec m = make_model("0", "y", "y", 0.0, "wiggins");
  mc::MCConfig cfg;
  cfg.n_paths = 400;
  cfg.n_steps = 50;
  cfg.seed = 17;
  const double T = 0.5, y0 = 1.0;
  const mc::PathEnsemble paths =
      mc::simulate_paths(m, BoundaryKind::Unattainable, y0, T, cfg, 400);
  // invert the scheme for the increments of the two drivers
  const double dt = T / cfg.n_steps;
  double sum = 0.0, sum2b = 0.0, sum2w = 0.0;
  std::int64_t count = 0;
  for (const auto& path : paths.y) (void)path;
  for (std::size_t p = 0; p < paths.y.size(); ++p) {
    for (int s = 0; s < cfg.n_steps; ++s) {
      const double y = paths.y[p][s];
      if (y <= 0.0) continue;
      const double dB = (paths.y[p][s + 1] - y) / y;   // sigma(y) = y
      const double dW =
          (paths.log_growth[p][s + 1] - paths.log_growth[p][s] + 0.5 * y * y * dt) / y;
      sum += dB * dW;
      sum2b += dB * dB;
      sum2w += dW * dW;
      ++count;
    }
  }
  const double corr = sum / std::sqrt(sum2b * sum2w);
  CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("price: constant payoff is exact") {
  mc::MCConfig cfg;
  cfg.n_paths = 1000;
  cfg.n_steps = 10;
  cfg.seed = 5;
  const mc::Estimate e = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::constant(3.0), 1.0, 0.04, 1.0, cfg);
  CHECK(e.mean == 3.0);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("price: identity recovers the initial price in a martingale model") {
  mc::MCConfig cfg;
  cfg.n_paths = 100000;
  cfg.n_steps = 100;
  cfg.seed = 23;
  cfg.antithetic = true;
  const mc::Estimate e = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::identity(), 1.0, 0.04, 1.0, cfg);
  CHECK(std::abs(e.mean - 1.0) <= 3.0 * e.std_error);
}

TEST_CASE("price: near-frozen vol call matches Black-Scholes") {
  const ModelSpec m = make_model("0", "0.000001*y", "sqrt(y)", 0.0, "frozen");
  mc::MCConfig cfg;
  cfg.n_paths = 100000;
  cfg.n_steps = 50;
  cfg.seed = 29;
  const double y0 = 0.04;
  const mc::Estimate e = mc::price(m, BoundaryKind::Unattainable, payoff::call(1.0),
                                   1.0, y0, 1.0, cfg);
  const double bs = testsup::bs_call(1.0, 1.0, std::sqrt(y0), 1.0);
  CHECK(std::abs(e.mean - bs) <= 3.0 * e.std_error);
}

TEST_CASE("supermartingale property of the price") {
  mc::MCConfig cfg;
  cfg.n_paths = 40000;
  cfg.n_steps = 100;
  cfg.seed = 31;
  for (const ModelSpec& m : {heston(), explosive()}) {
    const mc::Estimate e = mc::price(m, BoundaryKind::Unattainable,
                                     payoff::identity(), 1.0, 1.0, 1.0, cfg);
    CHECK(e.mean <= 1.0 + 3.0 * e.std_error);
  }
}

TEST_CASE("price is bit-identical across kernel backends") {
  if (!kern::avx2_supported()) return;
  mc::MCConfig cfg;
  cfg.n_paths = 20000;
  cfg.n_steps = 60;
  cfg.seed = 99;
  cfg.antithetic = true;
  const kern::Backend before = kern::active_backend();
  kern::set_backend(kern::Backend::Avx2);
  const mc::Estimate a = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  kern::set_backend(kern::Backend::Scalar);
  const mc::Estimate b = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  kern::set_backend(before);
  CHECK(std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.std_error, &b.std_error, sizeof(double)) == 0);
}

TEST_CASE("determinism: same seed, same bits; thread count irrelevant") {
  mc::MCConfig cfg;
  cfg.n_paths = 20000;
  cfg.n_steps = 50;
  cfg.seed = 1234;
  cfg.n_threads = 1;
  const mc::Estimate a = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  const mc::Estimate b = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  cfg.n_threads = 2;
  const mc::Estimate c = mc::price(heston(), BoundaryKind::Unattainable,
                                   payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  CHECK(std::memcmp(&a.mean, &b.mean, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.mean, &c.mean, sizeof(double)) == 0);
  CHECK(a.std_error == c.std_error);
}

TEST_CASE("std error scaling with path count") {
  mc::MCConfig cfg;
  cfg.n_paths = 8000;
  cfg.n_steps = 50;
  cfg.seed = 77;
  const mc::Estimate small = mc::price(heston(), BoundaryKind::Unattainable,
                                       payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  cfg.n_paths = 32000;
  const mc::Estimate big = mc::price(heston(), BoundaryKind::Unattainable,
                                     payoff::call(1.0), 1.0, 0.04, 1.0, cfg);
  const double ratio = small.std_error / big.std_error;
  CHECK(ratio > 1.6);
  CHECK(ratio < 2.4);
}

TEST_CASE("explosion probability: horizon zero is exactly zero") {
  mc::MCConfig cfg;
  cfg.n_paths = 100;
  cfg.n_steps = 10;
  cfg.seed = 1;
  const mc::ExplosionEstimate e = mc::explosion_probability(
      parse_or_throw("y^2"), parse_or_throw("y"), 1.0, 0.0, cfg);
  CHECK(e.prob.mean == 0.0);
  CHECK(e.prob.std_error == 0.0);
}

TEST_CASE("explosion probability: non-explosive drift gives zero") {
  mc::MCConfig cfg;
  cfg.n_paths = 4000;
  cfg.n_steps = 200;
  cfg.seed = 19;
  const mc::ExplosionEstimate e = mc::explosion_probability(
      parse_or_throw("0.3-2.2*y"), parse_or_throw("0.4*sqrt(y)"), 0.04, 1.0, cfg);
  CHECK(e.prob.mean <= 3.0 * e.prob.std_error + 1e-12);
}

TEST_CASE("explosion probability: deterministic blow-up is detected") {
  // near-deterministic y' = y^2 from y0 = 2 blows up at t = 1/2 < 1
  mc::MCConfig cfg;
  cfg.n_paths = 2000;
  cfg.n_steps = 400;
  cfg.seed = 101;
  const mc::ExplosionEstimate e = mc::explosion_probability(
      parse_or_throw("y^2"), parse_or_throw("0.01*y"), 2.0, 1.0, cfg);
  CHECK(e.prob.mean > 0.99);
  CHECK(e.censored_paths == 0);
}

TEST_CASE("explosion probability nondecreasing in the initial state") {
  mc::MCConfig cfg;
  cfg.n_paths = 8000;
  cfg.n_steps = 200;
  cfg.seed = 55;
  double prev = -1.0, prev_se = 0.0;
  for (double y0 : {0.5, 1.0, 2.0, 4.0}) {
    mc::MCConfig c2 = cfg;
    c2.barrier_levels = {1e2 * std::max(1.0, y0), 1e3 * std::max(1.0, y0),
                         1e4 * std::max(1.0, y0)};
    const mc::ExplosionEstimate e = mc::explosion_probability(
        parse_or_throw("y^2"), parse_or_throw("y"), y0, 1.0, c2);
    if (prev >= 0.0)
      CHECK(e.prob.mean + 3.0 * (e.prob.std_error + prev_se) >= prev);
    prev = e.prob.mean;
    prev_se = e.prob.std_error;
  }
}

TEST_CASE("martingale drift diagnostic") {
  // field v(x, y, t) = x on a wide grid
  grid::FieldSeries vx;
  vx.grid.x = grid::sinh_nodes_from_zero(400.0, 80, 1.0);
  vx.grid.y = grid::sinh_nodes_from_zero(50.0, 40, 0.5);
  vx.grid.T = 1.0;
  vx.grid.dt = 0.5;
  vx.times = {0.0, 0.5, 1.0};
  vx.levels.resize(3);
  for (auto& lvl : vx.levels) {
    lvl.v.resize(vx.grid.nx() * vx.grid.ny());
    for (std::size_t i = 0; i < vx.grid.nx(); ++i)
      for (std::size_t j = 0; j < vx.grid.ny(); ++j)
        lvl.v[vx.grid.idx(i, j)] = vx.grid.x[i];
  }

  mc::MCConfig cfg;
  cfg.n_paths = 20000;
  cfg.n_steps = 100;
  cfg.seed = 202;

  // constant field: drift identically zero
  grid::FieldSeries vc = vx;
  for (auto& lvl : vc.levels) std::fill(lvl.v.begin(), lvl.v.end(), 2.5);
  const mc::DriftDiagnostic dc = mc::local_martingale_diagnostic(
      heston(), BoundaryKind::Unattainable, vc, 1.0, 0.04, 1.0, cfg);
  CHECK(dc.drift_per_time == 0.0);
  CHECK(dc.std_error == 0.0);
  CHECK(!dc.supermartingale_like);

  // v = x in a martingale model: no drift
  const mc::DriftDiagnostic dm = mc::local_martingale_diagnostic(
      heston(), BoundaryKind::Unattainable, vx, 1.0, 0.04, 1.0, cfg);
  CHECK(std::abs(dm.drift_per_time) <= 3.0 * dm.std_error);

  // v = x in a strict-local-martingale model: significantly negative
  const mc::DriftDiagnostic dx = mc::local_martingale_diagnostic(
      explosive(), BoundaryKind::Unattainable, vx, 1.0, 1.0, 1.0, cfg);
  CHECK(dx.supermartingale_like);
  CHECK(dx.drift_per_time < 0.0);
}
