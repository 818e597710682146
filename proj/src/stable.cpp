#include "ifsm/stable.hpp"

#include <stdexcept>
#include <string>

namespace ifsm {

StableSpec::StableSpec(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("alpha must lie in (0, 2], got " + std::to_string(alpha));
}

StableSampler::StableSampler(StableSpec spec) noexcept
    : alpha_(spec.alpha()), inv_alpha_(1.0 / spec.alpha()), one_minus_alpha_(1.0 - spec.alpha()) {
  if (alpha_ == 2.0)
    branch_ = Branch::Gaussian;
  else if (std::abs(alpha_ - 1.0) < kCauchyBand)
    branch_ = Branch::Cauchy;
  else
    branch_ = Branch::Cms;
}

double sample_sas(StableSpec spec, double scale, SeededRng& rng) {
  if (!(scale >= 0.0) || !std::isfinite(scale))
    throw std::invalid_argument("stable scale must be finite and nonnegative");
  if (scale == 0.0) return 0.0;
  return scale * StableSampler(spec)(rng);
}

double cell_scale(double control_mass, StableSpec spec) {
  if (!(control_mass >= 0.0)) throw std::invalid_argument("control mass must be nonnegative");
  return std::pow(control_mass, 1.0 / spec.alpha());
}

void fill_noise_cells(const StableSampler& sampler, double scale, const SeededRng& rng, std::size_t path,
                      std::size_t first_cell, std::span<double> out) {
  if (out.empty()) return;
  const std::size_t last = first_cell + out.size();
  std::size_t block = first_cell / kNoiseCellBlock;
  for (std::size_t begin = block * kNoiseCellBlock; begin < last; begin += kNoiseCellBlock, ++block) {
    SeededRng stream = rng.substream(stream_id({path, block}));
    for (std::size_t j = begin; j < begin + kNoiseCellBlock && j < last; ++j) {
      const double v = scale * sampler(stream);
      if (j >= first_cell) out[j - first_cell] = v;
    }
  }
}

StableNoiseField sample_noise_field(const SpatialGrid& grid, std::size_t n_paths, StableSpec spec,
                                    const SeededRng& rng, std::size_t memory_budget) {
  if (n_paths == 0) throw std::invalid_argument("noise field: n_paths must be at least 1");
  const std::size_t n_cells = grid.n_cells();
  if (n_cells > memory_budget / sizeof(double) / n_paths)
    throw std::length_error("noise field of " + std::to_string(n_paths) + " x " + std::to_string(n_cells) +
                            " cells exceeds the memory budget");
  StableNoiseField field{spec, rng.seed(), rng.stream(), grid, n_paths, std::vector<double>(n_paths * n_cells)};
  const StableSampler sampler(spec);
  const double scale = field.scale_per_cell();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_paths; ++i)
    fill_noise_cells(sampler, scale, rng, i, 0, {field.values.data() + i * n_cells, n_cells});
  return field;
}

}  // namespace ifsm
