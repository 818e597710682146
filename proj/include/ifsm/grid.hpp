#pragma once

#include <cstddef>
#include <vector>

namespace ifsm {

/// Uniform time grid t_k = k * t_max / n_steps, k = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double t_max, std::size_t n_steps);

  double t_max() const noexcept { return t_max_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t n_points() const noexcept { return n_steps_ + 1; }
  double dt() const noexcept { return t_max_ / static_cast<double>(n_steps_); }
  double at(std::size_t k) const noexcept { return static_cast<double>(k) * dt(); }

  /// Index of grid point t; throws std::invalid_argument if t is not on the grid.
  std::size_t index_of(double t) const;
  bool contains(double t) const noexcept;

  bool operator==(const TimeGrid&) const = default;

 private:
  double t_max_;
  std::size_t n_steps_;
};

/// Truncated x-axis [-X, X] split into 2 * cells_per_side cells of width dx.
/// Zero always lies on a cell boundary.
class SpatialGrid {
 public:
  SpatialGrid(double half_width, std::size_t cells_per_side);

  /// Grid with spacing `dx`; the half-width is rounded up to a multiple of dx.
  static SpatialGrid with_spacing(double half_width, double dx);

  double half_width() const noexcept { return half_width_; }
  double dx() const noexcept { return dx_; }
  std::size_t cells_per_side() const noexcept { return cells_per_side_; }
  std::size_t n_cells() const noexcept { return 2 * cells_per_side_; }

  double cell_lo(std::size_t j) const noexcept {
    return (static_cast<double>(j) - static_cast<double>(cells_per_side_)) * dx_;
  }
  double cell_hi(std::size_t j) const noexcept { return cell_lo(j) + dx_; }
  double midpoint(std::size_t j) const noexcept { return cell_lo(j) + 0.5 * dx_; }

  /// Cell containing x (clamped into the grid; right-closed at the upper edge).
  std::size_t cell_of(double x) const noexcept;
  double clip(double x) const noexcept;

  /// Length of [lo, hi] intersected with cell j.
  double overlap(std::size_t j, double lo, double hi) const noexcept;

  bool operator==(const SpatialGrid&) const = default;

 private:
  double half_width_;
  double dx_;
  std::size_t cells_per_side_;
};

/// Grid indices for a list of times, validating that each lies on the grid.
std::vector<std::size_t> time_indices(const TimeGrid& grid, const std::vector<double>& times);

}  // namespace ifsm
