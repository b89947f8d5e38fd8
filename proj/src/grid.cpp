#include "svol/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace svol::grid {

DiffWeights central_first(double hm, double hp) {
  DiffWeights w;
  w.wl = -hp / (hm * (hm + hp));
  w.wc = (hp - hm) / (hm * hp);
  w.wr = hm / (hp * (hm + hp));
  return w;
}

DiffWeights central_second(double hm, double hp) {
  DiffWeights w;
  w.wl = 2.0 / (hm * (hm + hp));
  w.wc = -2.0 / (hm * hp);
  w.wr = 2.0 / (hp * (hm + hp));
  return w;
}

std::size_t Grid::n_steps() const {
  return static_cast<std::size_t>(std::llround(T / dt));
}

void Grid::validate() const {
  if (x.size() < 4 || y.size() < 4) throw std::invalid_argument("grid too small");
  if (x.front() != 0.0 || y.front() != 0.0)
    throw std::invalid_argument("grid must start exactly at 0 in both coordinates");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("x nodes must increase strictly");
  for (std::size_t j = 1; j < y.size(); ++j)
    if (!(y[j] > y[j - 1])) throw std::invalid_argument("y nodes must increase strictly");
  if (!(dt > 0.0) || !(T > 0.0) || n_steps() < 1)
    throw std::invalid_argument("grid needs dt > 0 and T > 0");
}

namespace {

double lerp(double a, double b, double t) { return a + t * (b - a); }

std::size_t bracket(const std::vector<double>& nodes, double v, double* t) {
  // returns i with nodes[i] <= v <= nodes[i+1]; clamps outside
  if (v <= nodes.front()) {
    *t = 0.0;
    return 0;
  }
  if (v >= nodes.back()) {
    *t = 1.0;
    return nodes.size() - 2;
  }
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
  const std::size_t i = static_cast<std::size_t>(it - nodes.begin()) - 1;
  *t = (v - nodes[i]) / (nodes[i + 1] - nodes[i]);
  return i;
}

}  // namespace

double FieldSeries::interpolate(double xq, double yq, double tau, bool* clamped) const {
  if (clamped)
    *clamped = xq < grid.x.front() || xq > grid.x.back() || yq < grid.y.front() ||
               yq > grid.y.back() || tau < times.front() || tau > times.back();
  double tx, ty, tt;
  const std::size_t i = bracket(grid.x, xq, &tx);
  const std::size_t j = bracket(grid.y, yq, &ty);
  const std::size_t n = bracket(times, tau, &tt);
  auto bilin = [&](const Field& f) {
    const double v00 = f.at(grid, i, j), v01 = f.at(grid, i, j + 1);
    const double v10 = f.at(grid, i + 1, j), v11 = f.at(grid, i + 1, j + 1);
    return lerp(lerp(v00, v01, ty), lerp(v10, v11, ty), tx);
  };
  return lerp(bilin(levels[n]), bilin(levels[n + 1]), tt);
}

double ProfileSeries::at_time_index(std::size_t n, double yq) const {
  double ty;
  const std::size_t j = bracket(y, yq, &ty);
  return lerp(levels[n][j], levels[n][j + 1], ty);
}

double ProfileSeries::interpolate(double yq, double tau) const {
  double tt;
  const std::size_t n = bracket(times, tau, &tt);
  return lerp(at_time_index(n, yq), at_time_index(n + 1, yq), tt);
}

std::vector<double> sinh_nodes_from_zero(double max, std::size_t n, double scale) {
  if (n < 4) throw std::invalid_argument("need at least 4 nodes");
  if (!(max > 0.0) || !(scale > 0.0)) throw std::invalid_argument("bad grid extents");
  const double Xi = std::asinh(max / scale);
  std::vector<double> nodes(n);
  for (std::size_t j = 0; j < n; ++j)
    nodes[j] = scale * std::sinh(Xi * double(j) / double(n - 1));
  nodes.front() = 0.0;
  nodes.back() = max;
  return nodes;
}

std::vector<double> sinh_nodes_around(double max, std::size_t n, double center,
                                      double scale) {
  if (n < 4) throw std::invalid_argument("need at least 4 nodes");
  if (!(max > center) || !(center > 0.0))
    throw std::invalid_argument("center must lie inside (0, max)");
  const double xi_lo = std::asinh(-center / scale);
  const double xi_hi = std::asinh((max - center) / scale);
  const std::size_t n_cells = n - 1;
  std::size_t lo_cells = static_cast<std::size_t>(
      std::llround(double(n_cells) * (-xi_lo) / (xi_hi - xi_lo)));
  lo_cells = std::min(std::max<std::size_t>(lo_cells, 2), n_cells - 2);
  std::vector<double> nodes(n);
  for (std::size_t j = 0; j <= lo_cells; ++j)
    nodes[j] = center + scale * std::sinh(xi_lo * (1.0 - double(j) / double(lo_cells)));
  const std::size_t hi_cells = n_cells - lo_cells;
  for (std::size_t j = 1; j <= hi_cells; ++j)
    nodes[lo_cells + j] = center + scale * std::sinh(xi_hi * double(j) / double(hi_cells));
  nodes.front() = 0.0;
  nodes[lo_cells] = center;
  nodes.back() = max;
  return nodes;
}

void snap_anchors(std::vector<double>& nodes, const std::vector<double>& anchors) {
  for (double a : anchors) {
    if (!(a > nodes.front()) || !(a < nodes.back())) continue;
    std::size_t best = 1;
    double dist = std::abs(nodes[1] - a);
    for (std::size_t i = 2; i + 1 < nodes.size(); ++i) {
      const double d = std::abs(nodes[i] - a);
      if (d < dist) {
        dist = d;
        best = i;
      }
    }
    nodes[best] = a;
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
}

}  // namespace svol::grid
