#include "svol/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svol::payoff {

namespace {

void validate(const Payoff& p) {
  if (p.pts.empty()) throw std::invalid_argument("payoff needs at least one breakpoint");
  if (p.pts.front().x != 0.0)
    throw std::invalid_argument("payoff must start at x = 0");
  for (std::size_t i = 0; i < p.pts.size(); ++i) {
    if (p.pts[i].g < 0.0) throw std::invalid_argument("payoff must be nonnegative");
    if (i > 0 && !(p.pts[i].x > p.pts[i - 1].x))
      throw std::invalid_argument("payoff breakpoints must be strictly increasing");
  }
  if (p.terminal_slope < 0.0)
    throw std::invalid_argument("payoff terminal slope must be nonnegative");
}

}  // namespace

double Payoff::operator()(double x) const {
  if (x <= pts.front().x) return pts.front().g;
  if (x >= pts.back().x)
    return pts.back().g + terminal_slope * (x - pts.back().x);
  auto it = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double v, const Breakpoint& b) { return v < b.x; });
  const Breakpoint& hi = *it;
  const Breakpoint& lo = *std::prev(it);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.g + t * (hi.g - lo.g);
}

Payoff call(double strike) {
  Payoff p{{{0.0, 0.0}, {strike, 0.0}}, 1.0, "call"};
  validate(p);
  return p;
}

Payoff put(double strike) {
  Payoff p{{{0.0, strike}, {strike, 0.0}}, 0.0, "put"};
  validate(p);
  return p;
}

Payoff digital(double strike, double cash) {
  const double w = 1e-6 * strike;
  Payoff p{{{0.0, 0.0}, {strike - w, 0.0}, {strike, cash}}, 0.0, "digital"};
  validate(p);
  return p;
}

Payoff identity() {
  Payoff p{{{0.0, 0.0}}, 1.0, "identity"};
  validate(p);
  return p;
}

Payoff constant(double c) {
  Payoff p{{{0.0, c}}, 0.0, "constant"};
  validate(p);
  return p;
}

Payoff piecewise_linear(std::vector<Breakpoint> pts, double terminal_slope,
                        std::string name) {
  Payoff p{std::move(pts), terminal_slope, std::move(name)};
  validate(p);
  return p;
}

double eta(const Payoff& g) { return g.terminal_slope; }

std::vector<double> kink_locations(const Payoff& g) {
  std::vector<double> ks;
  for (std::size_t i = 1; i + 1 <= g.pts.size(); ++i) {
    // interior slope change
    const double sl =
        (g.pts[i].g - g.pts[i - 1].g) / (g.pts[i].x - g.pts[i - 1].x);
    const double sr = (i + 1 < g.pts.size())
                          ? (g.pts[i + 1].g - g.pts[i].g) / (g.pts[i + 1].x - g.pts[i].x)
                          : g.terminal_slope;
    if (sl != sr) ks.push_back(g.pts[i].x);
  }
  return ks;
}

Majorant concave_majorant(const Payoff& g) {
  validate(g);
  const double slope_inf = g.terminal_slope;

  // Upper concave hull of the breakpoints (monotone chain, x already sorted).
  std::vector<Breakpoint> hull;
  for (const Breakpoint& p : g.pts) {
    while (hull.size() >= 2) {
      const Breakpoint& a = hull[hull.size() - 2];
      const Breakpoint& b = hull[hull.size() - 1];
      // drop b if it lies on or below chord a-p
      const double cross =
          (b.x - a.x) * (p.g - a.g) - (p.x - a.x) * (b.g - a.g);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(p);
  }

  // Attach the terminal ray of slope eta: drop trailing vertices while the
  // last hull segment is flatter than the ray (the ray from the previous
  // vertex then dominates the dropped one).
  while (hull.size() >= 2) {
    const Breakpoint& a = hull[hull.size() - 2];
    const Breakpoint& b = hull[hull.size() - 1];
    const double seg = (b.g - a.g) / (b.x - a.x);
    if (seg < slope_inf) hull.pop_back();
    else break;
  }
  // All remaining segment slopes are >= slope_inf >= 0, so the hull is
  // automatically nondecreasing and concave down to the terminal ray.

  Majorant m;
  m.h.pts = hull;
  m.h.terminal_slope = slope_inf;
  m.h.name = g.name + "-majorant";
  m.eta = slope_inf;
  double growth = slope_inf;
  for (const Breakpoint& p : hull) growth = std::max(growth, p.g / (1.0 + p.x));
  m.growth_constant = growth;
  return m;
}

}  // namespace svol::payoff
