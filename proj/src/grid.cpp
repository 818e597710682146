#include "ifsm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ifsm {

TimeGrid::TimeGrid(double t_max, std::size_t n_steps) : t_max_(t_max), n_steps_(n_steps) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("time grid: t_max must be positive");
  if (n_steps == 0) throw std::invalid_argument("time grid: n_steps must be at least 1");
}

bool TimeGrid::contains(double t) const noexcept {
  if (t < -1e-12 || t > t_max_ * (1.0 + 1e-12)) return false;
  const double k = t / dt();
  return std::abs(k - std::round(k)) < 1e-6;
}

std::size_t TimeGrid::index_of(double t) const {
  if (!contains(t)) throw std::invalid_argument("time " + std::to_string(t) + " is not a grid point");
  return static_cast<std::size_t>(std::llround(t / dt()));
}

std::vector<std::size_t> time_indices(const TimeGrid& grid, const std::vector<double>& times) {
  std::vector<std::size_t> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(grid.index_of(t));
  return out;
}

SpatialGrid::SpatialGrid(double half_width, std::size_t cells_per_side)
    : half_width_(half_width), cells_per_side_(cells_per_side) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("spatial grid: half-width must be positive");
  if (cells_per_side == 0) throw std::invalid_argument("spatial grid: need at least one cell per side");
  dx_ = half_width / static_cast<double>(cells_per_side);
}

SpatialGrid SpatialGrid::with_spacing(double half_width, double dx) {
  if (!(dx > 0.0)) throw std::invalid_argument("spatial grid: dx must be positive");
  const auto n = static_cast<std::size_t>(std::ceil(half_width / dx - 1e-9));
  return SpatialGrid(static_cast<double>(std::max<std::size_t>(n, 1)) * dx, std::max<std::size_t>(n, 1));
}

std::size_t SpatialGrid::cell_of(double x) const noexcept {
  const double u = x / dx_ + static_cast<double>(cells_per_side_);
  if (!(u > 0.0)) return 0;
  const auto j = static_cast<std::size_t>(u);
  return std::min(j, n_cells() - 1);
}

double SpatialGrid::clip(double x) const noexcept { return std::clamp(x, -half_width_, half_width_); }

double SpatialGrid::overlap(std::size_t j, double lo, double hi) const noexcept {
  const double a = std::max(lo, cell_lo(j));
  const double b = std::min(hi, cell_hi(j));
  return b > a ? b - a : 0.0;
}

}  // namespace ifsm
