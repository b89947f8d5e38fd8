#pragma once

// Rectangular nonuniform grids for the valuation solve, plus the sampled
// fields that live on them. Grids refine geometrically toward y = 0 and
// toward payoff kinks (adjacent-cell ratio kept near 1.1 via a sinh map)
// and carry anchor nodes placed exactly at strikes and evaluation points.

#include <cstddef>
#include <vector>

namespace svol::grid {

struct DiffWeights {
  double wl = 0.0, wc = 0.0, wr = 0.0;
};

// three-point stencils on a nonuniform grid, spacings hm (left), hp (right)
DiffWeights central_first(double hm, double hp);
DiffWeights central_second(double hm, double hp);

struct Grid {
  std::vector<double> x;   // 0 = x_0 < ... < x_max
  std::vector<double> y;   // 0 = y_0 < ... < y_max
  double dt = 0.0;
  double T = 0.0;

  std::size_t nx() const { return x.size(); }
  std::size_t ny() const { return y.size(); }
  std::size_t n_steps() const;
  std::size_t idx(std::size_t i, std::size_t j) const { return i * y.size() + j; }
  void validate() const;
};

// 2D field over grid nodes at one time level, x-major storage.
struct Field {
  std::vector<double> v;

  double& at(const Grid& g, std::size_t i, std::size_t j) { return v[g.idx(i, j)]; }
  double at(const Grid& g, std::size_t i, std::size_t j) const { return v[g.idx(i, j)]; }
};

struct FieldSeries {
  Grid grid;
  std::vector<double> times;          // 0 = t_0 < ... = T
  std::vector<Field> levels;          // one per time
  // bilinear in (x, y), linear in time-to-maturity; outside the grid the
  // lookup clamps and reports it
  double interpolate(double x, double y, double tau, bool* clamped = nullptr) const;
};

// 1D profile series in y (for the survival function of the auxiliary
// diffusion).
struct ProfileSeries {
  std::vector<double> y;
  std::vector<double> times;
  std::vector<std::vector<double>> levels;
  double max_range_violation = 0.0;   // distance of values outside [0,1]
  double interpolate(double y, double tau) const;
  double at_time_index(std::size_t n, double yq) const;
};

// sinh-graded nodes on [0, max] concentrated near 0; spacing near zero is
// about scale * asinh(max/scale) / n.
std::vector<double> sinh_nodes_from_zero(double max, std::size_t n, double scale);

// sinh-graded nodes on [0, max] concentrated around `center` (payoff kink),
// with nodes placed exactly at 0 and at the center.
std::vector<double> sinh_nodes_around(double max, std::size_t n, double center,
                                      double scale);

// replace the interior node nearest each anchor with the exact anchor value
void snap_anchors(std::vector<double>& nodes, const std::vector<double>& anchors);

}  // namespace svol::grid
