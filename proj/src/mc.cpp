#include "svol/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "svol/kernels/dispatch.hpp"
#include "svol/kernels/philox.hpp"
#include "svol/kernels/tape.hpp"

namespace svol::mc {

namespace {

constexpr std::size_t kBlock = 1024;
constexpr std::uint32_t kStreamMain = 0;
constexpr std::uint32_t kStreamAux = 1;

void check_cfg(const MCConfig& cfg, double T) {
  if (cfg.n_paths < 1) throw std::invalid_argument("mc: n_paths must be >= 1");
  if (cfg.n_steps < 1) throw std::invalid_argument("mc: n_steps must be >= 1");
  if (T < 0.0) throw std::invalid_argument("mc: maturity must be nonnegative");
}

struct Tapes {
  kern::Tape mu, sigma, b;
  std::uint16_t max_slots() const {
    return std::max({mu.n_slots, sigma.n_slots, b.n_slots});
  }
};

Tapes compile_tapes(const model::ModelSpec& spec) {
  return Tapes{kern::compile(spec.mu), kern::compile(spec.sigma), kern::compile(spec.b)};
}

// Per-step observer over one block of contiguous paths: (step index just
// completed [-1 before the first step], time, path offset, y, log_growth).
using BlockObserver =
    std::function<void(int, double, std::int64_t, const double*, const double*, std::size_t)>;

// simulate paths [path_lo, path_hi) into yT/lgT (indexed by absolute path)
void run_chunk(const Tapes& tapes, model::BoundaryKind boundary, double rho, double y0,
               double T, const MCConfig& cfg, std::int64_t path_lo, std::int64_t path_hi,
               double* yT, double* lgT, const BlockObserver* observer) {
  const kern::KernelTable& K = kern::kernels();
  kern::StepParams p;
  p.dt = T / cfg.n_steps;
  p.sqrt_dt = std::sqrt(p.dt);
  p.rho = rho;
  p.rho_comp = std::sqrt(1.0 - rho * rho);
  const kern::BoundaryMode mode = boundary == model::BoundaryKind::Absorbing
                                      ? kern::BoundaryMode::Absorb
                                      : kern::BoundaryMode::Clamp;

  std::vector<double> y(kBlock), lg(kBlock), z1(kBlock), z2(kBlock);
  std::vector<double> mu(kBlock), sig(kBlock), bv(kBlock);
  std::vector<double> scratch(static_cast<std::size_t>(tapes.max_slots()) * kBlock);

  for (std::int64_t blk = path_lo; blk < path_hi; blk += kBlock) {
    const std::size_t n = static_cast<std::size_t>(
        std::min<std::int64_t>(kBlock, path_hi - blk));
    std::fill(y.begin(), y.begin() + n, y0);
    std::fill(lg.begin(), lg.begin() + n, 0.0);
    if (observer) (*observer)(-1, 0.0, blk, y.data(), lg.data(), n);
    for (int s = 0; s < cfg.n_steps; ++s) {
      K.normal_pairs(cfg.seed, kStreamMain, static_cast<std::uint64_t>(blk),
                     static_cast<std::uint32_t>(s), cfg.antithetic, n, z1.data(),
                     z2.data());
      K.tape_eval(tapes.mu, y.data(), mu.data(), n, scratch.data());
      K.tape_eval(tapes.sigma, y.data(), sig.data(), n, scratch.data());
      K.tape_eval(tapes.b, y.data(), bv.data(), n, scratch.data());
      K.euler_step(p, mode, n, y.data(), lg.data(), mu.data(), sig.data(), bv.data(),
                   z1.data(), z2.data());
      if (observer) (*observer)(s, (s + 1) * p.dt, blk, y.data(), lg.data(), n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isnan(y[i]) || std::isnan(lg[i]))
        throw std::runtime_error("mc: NaN state on path " + std::to_string(blk + i));
      yT[blk + i] = y[i];
      lgT[blk + i] = lg[i];
    }
  }
}

void run_parallel(const Tapes& tapes, model::BoundaryKind boundary, double rho,
                  double y0, double T, const MCConfig& cfg, double* yT, double* lgT,
                  const BlockObserver* observer) {
  int threads = cfg.n_threads > 0
                    ? cfg.n_threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, threads);
  if (observer) threads = 1;   // observers accumulate; keep the order fixed
  const std::int64_t n = cfg.n_paths;
  if (threads == 1 || n < static_cast<std::int64_t>(2 * kBlock)) {
    run_chunk(tapes, boundary, rho, y0, T, cfg, 0, n, yT, lgT, observer);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  const std::int64_t chunk =
      (n / threads / static_cast<std::int64_t>(kBlock) + 1) *
      static_cast<std::int64_t>(kBlock);
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        run_chunk(tapes, boundary, rho, y0, T, cfg, lo, hi, yT, lgT, nullptr);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

Estimate summarize(const std::vector<double>& samples, bool antithetic) {
  std::vector<double> units;
  if (antithetic) {
    const std::size_t pairs = samples.size() / 2;
    units.resize(pairs);
    for (std::size_t i = 0; i < pairs; ++i)
      units[i] = 0.5 * (samples[2 * i] + samples[2 * i + 1]);
    if (samples.size() % 2) units.push_back(samples.back());
  } else {
    units = samples;
  }
  Estimate e;
  e.n_effective = static_cast<std::int64_t>(units.size());
  const double n = static_cast<double>(units.size());
  e.mean = pairwise_sum(units.data(), units.size()) / n;
  if (units.size() > 1) {
    std::vector<double> sq(units.size());
    for (std::size_t i = 0; i < units.size(); ++i) {
      const double d = units[i] - e.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq.data(), sq.size()) / (n - 1.0);
    e.std_error = std::sqrt(var / n);
  }
  return e;
}

TerminalEnsemble simulate_terminal(const model::ModelSpec& spec,
                                   model::BoundaryKind boundary, double y0, double T,
                                   const MCConfig& cfg) {
  check_cfg(cfg, T);
  TerminalEnsemble out;
  out.y.resize(cfg.n_paths);
  out.log_growth.resize(cfg.n_paths);
  if (T == 0.0) {
    std::fill(out.y.begin(), out.y.end(), y0);
    std::fill(out.log_growth.begin(), out.log_growth.end(), 0.0);
    return out;
  }
  const Tapes tapes = compile_tapes(spec);
  run_parallel(tapes, boundary, spec.rho, y0, T, cfg, out.y.data(),
               out.log_growth.data(), nullptr);
  return out;
}

PathEnsemble simulate_paths(const model::ModelSpec& spec, model::BoundaryKind boundary,
                            double y0, double T, const MCConfig& cfg,
                            std::size_t max_stored) {
  check_cfg(cfg, T);
  MCConfig small = cfg;
  small.n_paths = std::min<std::int64_t>(cfg.n_paths,
                                         static_cast<std::int64_t>(max_stored));
  PathEnsemble paths;
  paths.t.resize(cfg.n_steps + 1);
  for (int s = 0; s <= cfg.n_steps; ++s) paths.t[s] = s * (T / cfg.n_steps);
  paths.y.assign(small.n_paths, std::vector<double>(cfg.n_steps + 1));
  paths.log_growth.assign(small.n_paths, std::vector<double>(cfg.n_steps + 1));
  BlockObserver obs = [&](int step, double, std::int64_t blk, const double* y,
                          const double* lg, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      paths.y[blk + i][step + 1] = y[i];
      paths.log_growth[blk + i][step + 1] = lg[i];
    }
  };
  std::vector<double> yT(small.n_paths), lgT(small.n_paths);
  const Tapes tapes = compile_tapes(spec);
  run_parallel(tapes, boundary, spec.rho, y0, T, small, yT.data(), lgT.data(), &obs);
  return paths;
}

Estimate price(const model::ModelSpec& spec, model::BoundaryKind boundary,
               const payoff::Payoff& g, double x0, double y0, double T,
               const MCConfig& cfg) {
  const TerminalEnsemble ens = simulate_terminal(spec, boundary, y0, T, cfg);
  std::vector<double> payoffs(ens.log_growth.size());
  for (std::size_t i = 0; i < payoffs.size(); ++i)
    payoffs[i] = g(x0 * std::exp(ens.log_growth[i]));
  return summarize(payoffs, cfg.antithetic);
}

ExplosionEstimate explosion_probability(const Expr& drift, const Expr& sigma, double y0,
                                        double T, const MCConfig& cfg) {
  check_cfg(cfg, T);
  ExplosionEstimate out;
  out.barriers = cfg.barrier_levels;
  if (out.barriers.empty())
    for (double lvl : {1e2, 1e3, 1e4}) out.barriers.push_back(lvl * std::max(1.0, y0));
  for (std::size_t k = 1; k < out.barriers.size(); ++k)
    if (!(out.barriers[k] > out.barriers[k - 1]))
      throw std::invalid_argument("mc: barrier levels must increase strictly");
  if (!(out.barriers.front() >= y0))
    throw std::invalid_argument("mc: barriers must lie above the initial state");
  if (out.barriers.size() < 3)
    throw std::invalid_argument("mc: need at least three barrier levels");

  const std::size_t nb = out.barriers.size();
  std::vector<std::int64_t> hits(nb, 0);
  out.prob.n_effective = cfg.n_paths;
  if (T == 0.0) {
    out.hit_fraction.assign(nb, 0.0);
    return out;
  }

  constexpr std::int64_t kSubstepCap = 1 << 22;
  const double top = out.barriers.back();
  const std::uint32_t k0 = static_cast<std::uint32_t>(cfg.seed);
  const std::uint32_t k1 = static_cast<std::uint32_t>(cfg.seed >> 32);

  const int threads = std::max(
      1, cfg.n_threads > 0 ? cfg.n_threads
                           : static_cast<int>(std::thread::hardware_concurrency()));
  std::vector<std::vector<std::int64_t>> hits_by_thread(
      threads, std::vector<std::int64_t>(nb, 0));
  std::vector<std::int64_t> censored_by_thread(threads, 0);
  std::exception_ptr err;
  std::mutex err_mu;

  auto worker = [&](int tid, std::int64_t lo, std::int64_t hi) {
    try {
      for (std::int64_t path = lo; path < hi; ++path) {
        const std::uint64_t draw = cfg.antithetic
                                       ? static_cast<std::uint64_t>(path) >> 1
                                       : static_cast<std::uint64_t>(path);
        const bool flip = cfg.antithetic && (path & 1);
        double y = y0;
        double y_ref = std::max(y0, 1e-12);
        double t = 0.0;
        const double dt0 = T / cfg.n_steps;
        int level = 0;
        double y_max = y0;
        std::int64_t sub = 0;
        while (t < T) {
          if (++sub > kSubstepCap) {
            ++censored_by_thread[tid];
            break;
          }
          double dt = dt0 / static_cast<double>(1 << std::min(level, 30));
          if (t + dt > T) dt = T - t;
          if (!(dt > 0.0)) break;
          const kern::PhiloxOut r = kern::philox4x32_10(
              static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
              static_cast<std::uint32_t>(sub), kStreamAux, k0, k1);
          const std::uint64_t bits =
              (static_cast<std::uint64_t>(r.v[0]) << 32) | r.v[1];
          double z = kern::inv_normal_cdf(kern::u64_to_unit(bits));
          if (flip) z = -z;
          const double yp = std::max(y, 0.0);
          y = y + drift.eval(yp) * dt + sigma.eval(yp) * std::sqrt(dt) * z;
          if (!std::isfinite(y)) y = top;   // overshot everything
          y = std::max(y, 0.0);
          t += dt;
          y_max = std::max(y_max, y);
          if (y >= top) break;
          while (y > 2.0 * y_ref && level < 30) {
            ++level;
            y_ref = y;
          }
        }
        for (std::size_t b = 0; b < nb; ++b)
          if (y_max >= out.barriers[b]) ++hits_by_thread[tid][b];
      }
    } catch (...) {
      std::lock_guard<std::mutex> g(err_mu);
      if (!err) err = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0, 0, cfg.n_paths);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (cfg.n_paths + threads - 1) / threads;
    for (int tth = 0; tth < threads; ++tth) {
      const std::int64_t lo = tth * chunk;
      const std::int64_t hi = std::min<std::int64_t>(cfg.n_paths, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, tth, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
  for (int tth = 0; tth < threads; ++tth) {
    out.censored_paths += censored_by_thread[tth];
    for (std::size_t b = 0; b < nb; ++b) hits[b] += hits_by_thread[tth][b];
  }

  out.hit_fraction.resize(nb);
  const double n = static_cast<double>(cfg.n_paths);
  for (std::size_t b = 0; b < nb; ++b) out.hit_fraction[b] = hits[b] / n;

  // Aitken extrapolation across the top three levels: hitting probabilities
  // decrease toward the explosion probability as barriers rise.
  const double p1 = out.hit_fraction[nb - 3];
  const double p2 = out.hit_fraction[nb - 2];
  const double p3 = out.hit_fraction[nb - 1];
  const double d1 = p2 - p1, d2 = p3 - p2;
  out.monotone = (d1 <= 0.0) && (d2 <= 0.0) && (std::abs(d2) <= std::abs(d1) + 1e-12);
  double est = p3;
  double extrap_err = std::abs(d2);
  if (out.monotone && std::abs(d2 - d1) > 1e-14) {
    const double aitken = p3 - d2 * d2 / (d2 - d1);
    // the true probability lies in [aitken-ish, p3]
    est = aitken;
    extrap_err = std::abs(p3 - aitken);
  }
  const double stat = std::sqrt(std::max(p3 * (1.0 - p3), 1e-300) / n);
  out.extrapolation_error = extrap_err;
  out.prob.mean = est;
  out.prob.std_error = stat + extrap_err;
  return out;
}

DriftDiagnostic local_martingale_diagnostic(const model::ModelSpec& spec,
                                            model::BoundaryKind boundary,
                                            const grid::FieldSeries& v, double x0,
                                            double y0, double T, const MCConfig& cfg) {
  check_cfg(cfg, T);
  DriftDiagnostic out;
  out.n_paths = cfg.n_paths;
  std::vector<double> v_prev(cfg.n_paths), dv_total(cfg.n_paths, 0.0);
  std::int64_t lookups = 0, clamped = 0;
  BlockObserver obs = [&](int step, double t, std::int64_t blk, const double* y,
                          const double* lg, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      bool cl = false;
      const double s = x0 * std::exp(lg[i]);
      const double val = v.interpolate(s, y[i], T - t, &cl);
      ++lookups;
      if (cl) ++clamped;
      if (step >= 0) dv_total[blk + i] += val - v_prev[blk + i];
      v_prev[blk + i] = val;
    }
  };
  std::vector<double> yT(cfg.n_paths), lgT(cfg.n_paths);
  const Tapes tapes = compile_tapes(spec);
  run_parallel(tapes, boundary, spec.rho, y0, T, cfg, yT.data(), lgT.data(), &obs);

  for (double& d : dv_total) d /= T;
  const Estimate e = summarize(dv_total, cfg.antithetic);
  out.drift_per_time = e.mean;
  out.std_error = e.std_error;
  out.clamped_fraction = lookups ? static_cast<double>(clamped) / lookups : 0.0;
  out.supermartingale_like = e.mean < -3.0 * e.std_error;
  return out;
}

}  // namespace svol::mc
