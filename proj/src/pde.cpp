#include "svol/pde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace svol::pde {

namespace {

using grid::DiffWeights;

// Thomas solve of a tridiagonal system; rows are diagonally dominant
// M-matrix rows here, so no pivoting is needed.
void thomas(const std::vector<double>& lo, const std::vector<double>& di,
            const std::vector<double>& up, std::vector<double>& rhs,
            std::vector<double>& work) {
  const std::size_t n = di.size();
  work.resize(n);
  double piv = di[0];
  rhs[0] /= piv;
  for (std::size_t i = 1; i < n; ++i) {
    work[i] = up[i - 1] / piv;
    piv = di[i] - lo[i] * work[i];
    rhs[i] = (rhs[i] - lo[i] * rhs[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= work[i + 1] * rhs[i + 1];
}

struct YOperatorRow {
  double lo = 0.0, up = 0.0;   // diagonal is -(lo + up)
};

// Stencils whose weights sum to zero are applied in difference form, so
// constant fields map to exactly zero instead of O(weight * eps) noise.
inline double apply3(const grid::DiffWeights& w, double vl, double vc, double vr) {
  return w.wl * (vl - vc) + w.wr * (vr - vc);
}

}  // namespace

CoefficientTuple generator_coeffs(const model::ModelSpec& spec, double x, double y) {
  const double b = spec.b.eval(y);
  const double s = spec.sigma.eval(y);
  CoefficientTuple t;
  t.a_xx = 0.5 * b * b * x * x;
  t.a_yy = 0.5 * s * s;
  t.a_xy = spec.rho * b * s * x;
  t.b_y = spec.mu.eval(y);
  return t;
}

grid::FieldSeries solve_valuation(const model::ModelSpec& spec, const payoff::Payoff& g,
                                  const grid::Grid& gr, const ValuationOptions& opt) {
  gr.validate();
  if (opt.far_field == YFarField::Dirichlet && !opt.top_value)
    throw std::invalid_argument("Dirichlet far field needs a top_value function");

  const std::size_t nx = gr.nx(), ny = gr.ny();
  const std::size_t N = gr.n_steps();
  const double dt = gr.dt;

  // y-dependent coefficients
  std::vector<double> bb2(ny), ss2(ny), muj(ny), cxy(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double b = spec.b.eval(gr.y[j]);
    const double s = spec.sigma.eval(gr.y[j]);
    bb2[j] = 0.5 * b * b;
    ss2[j] = 0.5 * s * s;
    muj[j] = spec.mu.eval(gr.y[j]);
    cxy[j] = spec.rho * b * s;
  }

  std::vector<DiffWeights> d2x(nx), d1x(nx);
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double hm = gr.x[i] - gr.x[i - 1], hp = gr.x[i + 1] - gr.x[i];
    d2x[i] = grid::central_second(hm, hp);
    d1x[i] = grid::central_first(hm, hp);
  }
  std::vector<DiffWeights> d2y(ny), d1y(ny);
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    const double hm = gr.y[j] - gr.y[j - 1], hp = gr.y[j + 1] - gr.y[j];
    d2y[j] = grid::central_second(hm, hp);
    d1y[j] = grid::central_first(hm, hp);
  }

  const bool dirichlet_bottom = opt.boundary == model::BoundaryKind::Absorbing;
  const bool dirichlet_top = opt.far_field == YFarField::Dirichlet;

  // y-operator rows (x-independent); the diagonal is always -(lo + up), so
  // constants are annihilated exactly
  std::vector<YOperatorRow> yop(ny);
  {
    // y = 0: degenerate transport with mu(0) >= 0 (forward difference); row
    // overridden entirely when the boundary is absorbing (Dirichlet)
    const double mu0 = muj[0];
    const double h0 = gr.y[1] - gr.y[0];
    if (!dirichlet_bottom && mu0 != 0.0) yop[0].up = mu0 / h0;
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      yop[j].lo = ss2[j] * d2y[j].wl;
      yop[j].up = ss2[j] * d2y[j].wr;
      const double mu = muj[j];
      const double hm = gr.y[j] - gr.y[j - 1], hp = gr.y[j + 1] - gr.y[j];
      if (mu >= 0.0) {
        yop[j].up += mu / hp;
      } else {
        yop[j].lo += -mu / hm;
      }
    }
    if (!dirichlet_top) {
      // far field d2/dy2 = 0: keep the drift with a one-sided difference
      const std::size_t j = ny - 1;
      yop[j].lo = -muj[j] / (gr.y[j] - gr.y[j - 1]);
    }
  }

  const payoff::Majorant maj = payoff::concave_majorant(g);
  double h_max = 1.0;
  for (std::size_t i = 0; i < nx; ++i) h_max = std::max(h_max, maj.h(gr.x[i]));
  const double blow_up = 10.0 * h_max;

  grid::FieldSeries out;
  out.grid = gr;
  out.times.resize(N + 1);
  out.levels.resize(N + 1);
  auto& V0 = out.levels[0].v;
  V0.resize(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    const double gi = g(gr.x[i]);
    for (std::size_t j = 0; j < ny; ++j) V0[gr.idx(i, j)] = gi;
  }
  out.times[0] = 0.0;

  std::vector<double> AX(nx * ny), AY(nx * ny), AM(nx * ny);
  std::vector<double> Y0(nx * ny), Y1(nx * ny);
  std::vector<double> tlo(nx), tdi(nx), tup(nx), trhs(nx), twork(nx);
  std::vector<double> ylo(ny), ydi(ny), yup(ny), yrhs(ny), ywork(ny);

  std::vector<double> V = V0;
  const double g0 = g(0.0);

  for (std::size_t n = 0; n < N; ++n) {
    const double theta = (static_cast<int>(n) < opt.rannacher_steps) ? 1.0 : opt.theta;
    const double tau_new = (n + 1) * dt;

    // explicit applications (difference form: constants map to exact zero)
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t id = gr.idx(i, j);
        // A_x
        double ax = 0.0;
        if (i > 0 && i + 1 < nx) {
          const double coef = bb2[j] * gr.x[i] * gr.x[i];
          ax = coef * apply3(d2x[i], V[gr.idx(i - 1, j)], V[id], V[gr.idx(i + 1, j)]);
        }
        AX[id] = ax;
        // A_y
        double ay = 0.0;
        const YOperatorRow& r = yop[j];
        if ((dirichlet_bottom && j == 0) || (dirichlet_top && j + 1 == ny)) {
          ay = 0.0;
        } else {
          if (j > 0) ay += r.lo * (V[gr.idx(i, j - 1)] - V[id]);
          if (j + 1 < ny) ay += r.up * (V[gr.idx(i, j + 1)] - V[id]);
        }
        AY[id] = ay;
        // explicit mixed term; one-sided in x at the far-field column, where
        // the solution is asymptotically linear in x and the one-sided
        // difference of dv/dy is exact (dropping it entirely would remove
        // the whole auxiliary drift for models with mu = 0)
        double am = 0.0;
        if (i > 0 && j > 0 && j + 1 < ny && cxy[j] != 0.0) {
          const double coef = cxy[j] * gr.x[i];
          auto dy_at = [&](std::size_t ii) {
            return apply3(d1y[j], V[gr.idx(ii, j - 1)], V[gr.idx(ii, j)],
                          V[gr.idx(ii, j + 1)]);
          };
          if (i + 1 < nx) {
            am = coef * apply3(d1x[i], dy_at(i - 1), dy_at(i), dy_at(i + 1));
          } else {
            am = coef * (dy_at(i) - dy_at(i - 1)) / (gr.x[i] - gr.x[i - 1]);
          }
        }
        AM[id] = am;
      }
    }

    for (std::size_t id = 0; id < nx * ny; ++id)
      Y0[id] = V[id] + dt * (AX[id] + AY[id] + AM[id]);

    // implicit x sweep: (I - theta dt A_x) Y1 = Y0 - theta dt A_x V
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t id = gr.idx(i, j);
        trhs[i] = Y0[id] - theta * dt * AX[id];
        if (i == 0 || i + 1 == nx) {
          tlo[i] = 0.0;
          tdi[i] = 1.0;
          tup[i] = 0.0;
        } else {
          const double coef = theta * dt * bb2[j] * gr.x[i] * gr.x[i];
          tlo[i] = -coef * d2x[i].wl;
          tup[i] = -coef * d2x[i].wr;
          tdi[i] = 1.0 - (tlo[i] + tup[i]);
        }
      }
      thomas(tlo, tdi, tup, trhs, twork);
      for (std::size_t i = 0; i < nx; ++i) Y1[gr.idx(i, j)] = trhs[i];
    }

    // implicit y sweep: (I - theta dt A_y) V_new = Y1 - theta dt A_y V
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        const std::size_t id = gr.idx(i, j);
        yrhs[j] = Y1[id] - theta * dt * AY[id];
        const YOperatorRow& r = yop[j];
        if ((dirichlet_bottom && j == 0) || (dirichlet_top && j + 1 == ny)) {
          ylo[j] = 0.0;
          ydi[j] = 1.0;
          yup[j] = 0.0;
          yrhs[j] = (j == 0) ? g(gr.x[i]) : opt.top_value(gr.x[i], tau_new);
        } else {
          ylo[j] = -theta * dt * r.lo;
          yup[j] = -theta * dt * r.up;
          ydi[j] = 1.0 - (ylo[j] + yup[j]);
        }
      }
      thomas(ylo, ydi, yup, yrhs, ywork);
      for (std::size_t j = 0; j < ny; ++j) V[gr.idx(i, j)] = yrhs[j];
    }

    // boundary enforcement at the new level
    for (std::size_t j = 0; j < ny; ++j) V[gr.idx(0, j)] = g0;
    if (dirichlet_bottom)
      for (std::size_t i = 0; i < nx; ++i) V[gr.idx(i, 0)] = g(gr.x[i]);
    if (dirichlet_top)
      for (std::size_t i = 0; i < nx; ++i)
        V[gr.idx(i, ny - 1)] = opt.top_value(gr.x[i], tau_new);

    for (std::size_t id = 0; id < nx * ny; ++id) {
      if (!std::isfinite(V[id]) || std::abs(V[id]) > blow_up) {
        const std::size_t i = id / ny, j = id % ny;
        throw std::runtime_error(
            "valuation solve unstable at node (x=" + std::to_string(gr.x[i]) +
            ", y=" + std::to_string(gr.y[j]) + ", step " + std::to_string(n + 1) + ")");
      }
    }

    out.levels[n + 1].v = V;
    out.times[n + 1] = tau_new;
  }
  return out;
}

grid::ProfileSeries solve_survival(const model::ModelSpec& spec,
                                   const std::vector<double>& y_nodes, double dt,
                                   double T, ProfileFarField far_field) {
  const std::size_t ny = y_nodes.size();
  if (ny < 4) throw std::invalid_argument("survival solve needs at least 4 y nodes");
  const std::size_t N = static_cast<std::size_t>(std::llround(T / dt));
  if (N < 1) throw std::invalid_argument("survival solve needs at least one step");

  const Expr mu_t = model::auxiliary_drift(spec);
  std::vector<double> ss2(ny), muj(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double s = spec.sigma.eval(y_nodes[j]);
    ss2[j] = 0.5 * s * s;
    muj[j] = mu_t.eval(y_nodes[j]);
  }

  std::vector<YOperatorRow> rows(ny);
  {
    const double h0 = y_nodes[1] - y_nodes[0];
    if (muj[0] != 0.0) rows[0].up = muj[0] / h0;
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      const double hm = y_nodes[j] - y_nodes[j - 1], hp = y_nodes[j + 1] - y_nodes[j];
      const DiffWeights w = grid::central_second(hm, hp);
      rows[j].lo = ss2[j] * w.wl;
      rows[j].up = ss2[j] * w.wr;
      if (muj[j] >= 0.0) {
        rows[j].up += muj[j] / hp;
      } else {
        rows[j].lo += -muj[j] / hm;
      }
    }
    if (far_field == ProfileFarField::SecondDerivZero) {
      const std::size_t j = ny - 1;
      rows[j].lo = -muj[j] / (y_nodes[j] - y_nodes[j - 1]);
    }
  }

  grid::ProfileSeries out;
  out.y = y_nodes;
  out.times.resize(N + 1);
  out.levels.assign(N + 1, std::vector<double>(ny, 1.0));
  out.times[0] = 0.0;

  std::vector<double> lo(ny), di(ny), up(ny), rhs(ny), work(ny);
  std::vector<double> I = out.levels[0];
  const bool absorb = far_field == ProfileFarField::AbsorbZero;

  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t j = 0; j < ny; ++j) {
      rhs[j] = I[j];
      if (absorb && j + 1 == ny) {
        lo[j] = 0.0;
        di[j] = 1.0;
        up[j] = 0.0;
        rhs[j] = 0.0;
      } else {
        lo[j] = -dt * rows[j].lo;
        up[j] = -dt * rows[j].up;
        di[j] = 1.0 - (lo[j] + up[j]);
      }
    }
    thomas(lo, di, up, rhs, work);
    I = rhs;
    for (std::size_t j = 0; j < ny; ++j) {
      if (!std::isfinite(I[j]))
        throw std::runtime_error("survival solve unstable at step " + std::to_string(n));
      const double viol = std::max(I[j] - 1.0, -I[j]);
      if (viol > out.max_range_violation) out.max_range_violation = viol;
    }
    if (out.max_range_violation > 1e-3)
      throw std::runtime_error("survival solve left [0,1] by more than 1e-3");
    out.levels[n + 1] = I;
    out.times[n + 1] = (n + 1) * dt;
  }
  return out;
}

namespace {

double apply_generator_central(const grid::Grid& gr, const std::vector<double>& bb2,
                               const std::vector<double>& ss2,
                               const std::vector<double>& muj,
                               const std::vector<double>& cxy,
                               const std::vector<grid::DiffWeights>& d1x,
                               const std::vector<grid::DiffWeights>& d2x,
                               const std::vector<grid::DiffWeights>& d1y,
                               const std::vector<grid::DiffWeights>& d2y,
                               const std::vector<double>& V, std::size_t i,
                               std::size_t j) {
  const std::size_t ny = gr.ny();
  const std::size_t id = i * ny + j;
  const double coef_x = bb2[j] * gr.x[i] * gr.x[i];
  double lv = coef_x * apply3(d2x[i], V[id - ny], V[id], V[id + ny]);
  lv += ss2[j] * apply3(d2y[j], V[id - 1], V[id], V[id + 1]);
  lv += muj[j] * apply3(d1y[j], V[id - 1], V[id], V[id + 1]);
  if (cxy[j] != 0.0) {
    const double dl = apply3(d1y[j], V[id - ny - 1], V[id - ny], V[id - ny + 1]);
    const double dc = apply3(d1y[j], V[id - 1], V[id], V[id + 1]);
    const double dr = apply3(d1y[j], V[id + ny - 1], V[id + ny], V[id + ny + 1]);
    lv += cxy[j] * gr.x[i] * apply3(d1x[i], dl, dc, dr);
  }
  return lv;
}

}  // namespace

ResidualReport residual(const model::ModelSpec& spec, const grid::FieldSeries& series) {
  const grid::Grid& gr = series.grid;
  const std::size_t nx = gr.nx(), ny = gr.ny();
  const std::size_t nt = series.levels.size();
  if (nt < 3) throw std::invalid_argument("residual needs at least 3 time levels");
  const double dt = series.times[1] - series.times[0];

  std::vector<double> bb2(ny), ss2(ny), muj(ny), cxy(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    const double b = spec.b.eval(gr.y[j]);
    const double s = spec.sigma.eval(gr.y[j]);
    bb2[j] = 0.5 * b * b;
    ss2[j] = 0.5 * s * s;
    muj[j] = spec.mu.eval(gr.y[j]);
    cxy[j] = spec.rho * b * s;
  }
  std::vector<DiffWeights> d2x(nx), d1x(nx), d2y(ny), d1y(ny);
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    const double hm = gr.x[i] - gr.x[i - 1], hp = gr.x[i + 1] - gr.x[i];
    d2x[i] = grid::central_second(hm, hp);
    d1x[i] = grid::central_first(hm, hp);
  }
  for (std::size_t j = 1; j + 1 < ny; ++j) {
    const double hm = gr.y[j] - gr.y[j - 1], hp = gr.y[j + 1] - gr.y[j];
    d2y[j] = grid::central_second(hm, hp);
    d1y[j] = grid::central_first(hm, hp);
  }

  ResidualReport rep;
  const std::size_t n_lo = std::max<std::size_t>(1, nt / 10);
  const std::size_t n_hi = nt - 2;
  if (n_lo > n_hi) throw std::invalid_argument("residual: too few usable levels");
  const std::size_t stride = std::max<std::size_t>(1, (n_hi - n_lo) / 16);
  const std::size_t n_mid = (n_lo + n_hi) / 2;
  rep.mid_level.v.assign(nx * ny, 0.0);

  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t n = n_lo; n <= n_hi; n += stride) {
    const auto& Vm = series.levels[n - 1].v;
    const auto& Vc = series.levels[n].v;
    const auto& Vp = series.levels[n + 1].v;
    for (std::size_t i = 2; i + 2 < nx; ++i) {
      for (std::size_t j = 2; j + 2 < ny; ++j) {
        const std::size_t id = gr.idx(i, j);
        const double dvdT = (Vp[id] - Vm[id]) / (2.0 * dt);
        const double lv = apply_generator_central(gr, bb2, ss2, muj, cxy, d1x, d2x,
                                                  d1y, d2y, Vc, i, j);
        const double r = dvdT - lv;
        rep.max_abs = std::max(rep.max_abs, std::abs(r));
        sum_sq += r * r;
        ++count;
        if (n == n_mid) rep.mid_level.v[id] = r;
      }
    }
    ++rep.levels_used;
  }
  rep.l2 = count ? std::sqrt(sum_sq / count) : 0.0;
  return rep;
}

double residual_profile_l2(const model::ModelSpec& spec,
                           const grid::ProfileSeries& series) {
  const std::size_t ny = series.y.size();
  const std::size_t nt = series.levels.size();
  if (nt < 3) throw std::invalid_argument("residual needs at least 3 time levels");
  const double dt = series.times[1] - series.times[0];
  const Expr mu_t = model::auxiliary_drift(spec);

  double sum_sq = 0.0;
  std::size_t count = 0;
  const std::size_t n_lo = std::max<std::size_t>(1, nt / 10);
  for (std::size_t n = n_lo; n + 1 < nt; ++n) {
    for (std::size_t j = 2; j + 2 < ny; ++j) {
      const double hm = series.y[j] - series.y[j - 1];
      const double hp = series.y[j + 1] - series.y[j];
      const DiffWeights w2 = grid::central_second(hm, hp);
      const DiffWeights w1 = grid::central_first(hm, hp);
      const double s = spec.sigma.eval(series.y[j]);
      const auto& Im = series.levels[n - 1];
      const auto& Ic = series.levels[n];
      const auto& Ip = series.levels[n + 1];
      const double dIdT = (Ip[j] - Im[j]) / (2.0 * dt);
      const double diff = 0.5 * s * s * apply3(w2, Ic[j - 1], Ic[j], Ic[j + 1]);
      const double drift =
          mu_t.eval(series.y[j]) * apply3(w1, Ic[j - 1], Ic[j], Ic[j + 1]);
      const double r = dIdT - diff - drift;
      sum_sq += r * r;
      ++count;
    }
  }
  return count ? std::sqrt(sum_sq / count) : 0.0;
}

}  // namespace svol::pde
