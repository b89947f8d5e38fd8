#include "svol/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace svol::quad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// QUADPACK dqk15 abscissae/weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;       // linear variant: integral estimate
  double err;         // QUADPACK-style error estimate, same units as value
  double shift = 0.;  // log variant: value/err are in units of exp(shift)
};

template <class Eval>
Panel eval_panel_linear(const Eval& f, double a, double b) {
  const double hl = 0.5 * (b - a);
  const double ctr = 0.5 * (a + b);
  double fv[15];
  fv[7] = f(ctr);
  for (int i = 0; i < 7; ++i) {
    const double dx = hl * kXgk[i];
    fv[i] = f(ctr - dx);
    fv[14 - i] = f(ctr + dx);
  }
  for (double v : fv)
    if (std::isnan(v)) throw QuadratureError("integrand returned NaN", a, b);

  double resk = kWgk[7] * fv[7];
  double resg = kWg[3] * fv[7];
  double resabs = std::abs(resk);
  for (int i = 0; i < 7; ++i) {
    resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resabs += kWgk[i] * (std::abs(fv[i]) + std::abs(fv[14 - i]));
  }
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);

  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fv[7] - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

  double err = std::abs(resk - resg) * hl;
  resasc *= hl;
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  err = std::max(err, 50.0 * eps * resabs * hl);
  return Panel{a, b, resk * hl, err};
}

template <class Eval>
Panel eval_panel_log(const Eval& g, double a, double b) {
  const double hl = 0.5 * (b - a);
  const double ctr = 0.5 * (a + b);
  double gv[15];
  gv[7] = g(ctr);
  for (int i = 0; i < 7; ++i) {
    const double dx = hl * kXgk[i];
    gv[i] = g(ctr - dx);
    gv[14 - i] = g(ctr + dx);
  }
  double m = -kInf;
  for (double v : gv) {
    if (std::isnan(v)) throw QuadratureError("log-integrand returned NaN", a, b);
    m = std::max(m, v);
  }
  if (m == -kInf) return Panel{a, b, 0.0, 0.0, -kInf};

  double fv[15];
  for (int i = 0; i < 15; ++i) fv[i] = std::exp(gv[i] - m);
  double resk = kWgk[7] * fv[7];
  double resg = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);

  // integrand is positive: resabs == resk
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fv[7] - mean);
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::abs(fv[i] - mean) + std::abs(fv[14 - i] - mean));

  double err = std::abs(resk - resg) * hl;
  resasc *= hl;
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  err = std::max(err, 50.0 * eps * resk * hl);
  return Panel{a, b, resk * hl, err, m};
}

std::size_t worst_panel_linear(const std::vector<Panel>& ps) {
  std::size_t w = 0;
  for (std::size_t i = 1; i < ps.size(); ++i)
    if (ps[i].err > ps[w].err) w = i;
  return w;
}

}  // namespace

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, double rel_tol, int max_panels) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<Panel> panels;
  panels.push_back(eval_panel_linear(f, a, b));
  for (;;) {
    double total = 0.0, err = 0.0;
    for (const Panel& p : panels) {
      total += p.value;
      err += p.err;
    }
    if (err <= std::max(abs_tol, rel_tol * std::abs(total)) ||
        static_cast<int>(panels.size()) >= max_panels) {
      out.value = sign * total;
      out.abs_error = err;
      out.panels = static_cast<int>(panels.size());
      out.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
      if (!out.converged) {
        std::size_t w = worst_panel_linear(panels);
        throw QuadratureError("quadrature failed to converge within panel budget",
                              panels[w].a, panels[w].b);
      }
      return out;
    }
    std::size_t w = worst_panel_linear(panels);
    Panel p = panels[w];
    const double mid = 0.5 * (p.a + p.b);
    panels[w] = eval_panel_linear(f, p.a, mid);
    panels.push_back(eval_panel_linear(f, mid, p.b));
  }
}

LogQuadResult integrate_exp(const std::function<double(double)>& log_f, double a,
                            double b, double rel_tol, int max_panels) {
  LogQuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  if (a > b) std::swap(a, b);
  std::vector<Panel> panels;
  panels.push_back(eval_panel_log(log_f, a, b));
  for (;;) {
    double M = -kInf;
    for (const Panel& p : panels)
      if (p.value > 0.0) M = std::max(M, p.shift);
    double total = 0.0, err = 0.0;
    if (M != -kInf) {
      for (const Panel& p : panels) {
        if (p.shift == -kInf) continue;
        const double scale = std::exp(p.shift - M);
        total += p.value * scale;
        err += p.err * scale;
      }
    }
    const bool done = (total == 0.0 && err == 0.0) || err <= rel_tol * total;
    if (done || static_cast<int>(panels.size()) >= max_panels) {
      out.log_value = (total > 0.0) ? M + std::log(total) : -kInf;
      out.rel_error = (total > 0.0) ? err / total : 0.0;
      out.panels = static_cast<int>(panels.size());
      out.converged = done;
      if (!done) {
        std::size_t w = worst_panel_linear(panels);
        throw QuadratureError("log-quadrature failed to converge within panel budget",
                              panels[w].a, panels[w].b);
      }
      return out;
    }
    // subdivide the panel with the largest scaled error
    std::size_t w = 0;
    double worst = -kInf;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (panels[i].shift == -kInf) continue;
      const double e = std::log(std::max(panels[i].err, 1e-300)) + panels[i].shift;
      if (e > worst) {
        worst = e;
        w = i;
      }
    }
    Panel p = panels[w];
    const double mid = 0.5 * (p.a + p.b);
    panels[w] = eval_panel_log(log_f, p.a, mid);
    panels.push_back(eval_panel_log(log_f, mid, p.b));
  }
}

Cumulative::Cumulative(std::function<double(double)> f, double c, double rel_tol)
    : f_(std::move(f)), c_(c), rel_tol_(rel_tol) {
  if (!(c > 0.0)) throw std::invalid_argument("Cumulative: base point must be positive");
  memo_[std::log(c)] = 0.0;
}

double Cumulative::operator()(double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("Cumulative: query point must be positive");
  std::lock_guard<std::mutex> lock(mu_);
  const double u = std::log(x);
  auto it = memo_.lower_bound(u);
  // pick the nearest checkpoint
  if (it == memo_.end() || (it != memo_.begin() && u - std::prev(it)->first <
                                                       it->first - u)) {
    --it;
  }
  if (it->first == u) return it->second;
  auto in_u = [this](double t) {
    const double xi = std::exp(t);
    return f_(xi) * xi;
  };
  QuadResult q = integrate(in_u, it->first, u, 0.0, rel_tol_, 10000);
  const double val = it->second + q.value;
  memo_[u] = val;
  return val;
}

LogCumulative::LogCumulative(std::function<double(double)> log_f, double c,
                             double rel_tol)
    : log_f_(std::move(log_f)), c_(c), rel_tol_(rel_tol) {
  if (!(c > 0.0)) throw std::invalid_argument("LogCumulative: base point must be positive");
  const double u0 = std::log(c);
  up_[u0] = -kInf;
  down_[-u0] = -kInf;   // stored with flipped sign so the chain ascends
}

double LogCumulative::extend(std::map<double, double>& chain, double u_target,
                             bool upward) const {
  // always integrate forward from the nearest checkpoint at or below the
  // query; subtraction of nearly equal log-sums would lose all precision
  auto it = chain.upper_bound(u_target);
  --it;   // the base checkpoint is the minimum key, so this is valid
  if (it->first == u_target) return it->second;
  const double sgn = upward ? 1.0 : -1.0;
  auto in_u = [this, sgn](double t) {
    const double xi = std::exp(sgn * t);
    return log_f_(xi) + sgn * t;   // d xi = +/- e^{+/- t} dt, magnitude e^{sgn t}
  };
  LogQuadResult q = integrate_exp(in_u, it->first, u_target, rel_tol_, 10000);
  const double val = log_add(it->second, q.log_value);
  chain[u_target] = val;
  return val;
}

double LogCumulative::log_abs(double x) const {
  if (!(x > 0.0))
    throw std::invalid_argument("LogCumulative: query point must be positive");
  std::lock_guard<std::mutex> lock(mu_);
  const double u = std::log(x);
  if (x >= c_) return extend(up_, u, true);
  return extend(down_, -u, false);
}

}  // namespace svol::quad
