#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "ifsm/grid.hpp"
#include "ifsm/rng.hpp"

namespace ifsm {

/// Stability index of a symmetric alpha-stable law, 0 < alpha <= 2.
class StableSpec {
 public:
  explicit StableSpec(double alpha);
  double alpha() const noexcept { return alpha_; }
  bool operator==(const StableSpec&) const = default;

 private:
  double alpha_;
};

/// Draws from S_alpha(1), the symmetric stable law with characteristic
/// function exp(-|theta|^alpha). S_2(1) is N(0, 2); S_1(1) is standard Cauchy.
///
/// Chambers-Mallows-Stuck away from the endpoints; alpha within 1e-6 of 1 is
/// routed to the Cauchy branch, and alpha = 2 uses a Box-Muller Gaussian.
/// Every branch consumes exactly two uniforms per draw.
class StableSampler {
 public:
  static constexpr double kCauchyBand = 1e-6;

  explicit StableSampler(StableSpec spec) noexcept;

  double operator()(SeededRng& rng) const noexcept {
    const double v = std::numbers::pi * (rng.uniform01() - 0.5);
    const double w = -std::log(rng.uniform01());
    switch (branch_) {
      case Branch::Gaussian:
        return 2.0 * std::sin(v) * std::sqrt(w);
      case Branch::Cauchy:
        return std::tan(v);
      case Branch::Cms:
        break;
    }
    const double cos_v = std::cos(v);
    return std::sin(alpha_ * v) / std::pow(cos_v, inv_alpha_) *
           std::pow(std::cos(one_minus_alpha_ * v) / w, one_minus_alpha_ * inv_alpha_);
  }

  double alpha() const noexcept { return alpha_; }

 private:
  enum class Branch { Gaussian, Cauchy, Cms };
  double alpha_;
  double inv_alpha_;
  double one_minus_alpha_;
  Branch branch_;
};

/// One draw from S_alpha(scale). Throws on negative or non-finite scale.
double sample_sas(StableSpec spec, double scale, SeededRng& rng);

/// Scale of the random-measure value on a set of control mass `mass`: mass^(1/alpha).
double cell_scale(double control_mass, StableSpec spec);

/// Per-(path, x-cell) values of an independently scattered SaS random measure
/// with control measure (uniform on n_paths paths) x Lebesgue, row-major.
struct StableNoiseField {
  StableSpec spec;
  std::uint64_t seed;
  std::uint64_t stream;
  SpatialGrid grid;
  std::size_t n_paths;
  std::vector<double> values;

  std::span<const double> row(std::size_t path) const {
    return {values.data() + path * grid.n_cells(), grid.n_cells()};
  }
  double at(std::size_t path, std::size_t cell) const { return values[path * grid.n_cells() + cell]; }
  /// Scale of a single cell value, (dx / n_paths)^(1/alpha).
  double scale_per_cell() const { return cell_scale(grid.dx() / static_cast<double>(n_paths), spec); }
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30;  // bytes
inline constexpr std::size_t kNoiseCellBlock = 32;

/// Samples a full field. Cells are drawn in blocks of kNoiseCellBlock, one
/// substream per (path, block) under `rng`, so any sub-range can be
/// regenerated bit-identically with fill_noise_cells.
StableNoiseField sample_noise_field(const SpatialGrid& grid, std::size_t n_paths, StableSpec spec,
                                    const SeededRng& rng,
                                    std::size_t memory_budget = kDefaultMemoryBudget);

/// Field entries [first_cell, first_cell + out.size()) of row `path`.
void fill_noise_cells(const StableSampler& sampler, double scale, const SeededRng& rng, std::size_t path,
                      std::size_t first_cell, std::span<double> out);

}  // namespace ifsm
