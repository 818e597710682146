#include "ifsm/integral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ifsm {

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Indicator: return "Indicator";
    case KernelKind::SignedIndicator: return "SignedIndicator";
    case KernelKind::LocalTime: return "LocalTime";
    case KernelKind::LevyDeterministic: return "LevyDeterministic";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  for (auto k : {KernelKind::Indicator, KernelKind::SignedIndicator, KernelKind::LocalTime,
                 KernelKind::LevyDeterministic})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::IFSM: return "IFSM";
    case ProcessKind::LTFSM: return "LTFSM";
    case ProcessKind::Levy: return "Levy";
  }
  return "unknown";
}

ProcessKind process_kind_from_string(const std::string& name) {
  for (auto k : {ProcessKind::IFSM, ProcessKind::LTFSM, ProcessKind::Levy})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown process '" + name + "'");
}

namespace {

double signed_coverage(const SpatialGrid& grid, std::size_t cell, double endpoint) {
  return endpoint >= 0.0 ? grid.overlap(cell, 0.0, endpoint) / grid.dx()
                         : -grid.overlap(cell, endpoint, 0.0) / grid.dx();
}

void check_times(const SubordinatorEnsemble& ensemble, const std::vector<std::size_t>& idx) {
  for (auto k : idx)
    if (k >= ensemble.n_points()) throw std::invalid_argument("requested time lies beyond the ensemble grid");
}

// Breakpoint layout of one path: the sorted distinct clipped endpoints {0, A_t}.
struct PathGeometry {
  std::vector<double> gap_scale;       // S_alpha scale of M on each gap
  std::vector<std::uint32_t> slot;     // breakpoint position per requested time
  std::vector<signed char> sign;       // sign(A_t) per requested time
  std::uint32_t zero = 0;              // position of x = 0
};

PathGeometry build_geometry(std::span<const double> endpoints, const SpatialGrid& grid, double mass_per_length,
                            double inv_alpha) {
  std::vector<double> b;
  b.reserve(endpoints.size() + 1);
  b.push_back(0.0);
  for (double a : endpoints) b.push_back(grid.clip(a));
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());

  PathGeometry g;
  g.gap_scale.resize(b.size() - 1);
  for (std::size_t l = 0; l + 1 < b.size(); ++l) g.gap_scale[l] = std::pow((b[l + 1] - b[l]) * mass_per_length, inv_alpha);
  g.zero = static_cast<std::uint32_t>(std::lower_bound(b.begin(), b.end(), 0.0) - b.begin());
  g.slot.resize(endpoints.size());
  g.sign.resize(endpoints.size());
  for (std::size_t s = 0; s < endpoints.size(); ++s) {
    const double a = grid.clip(endpoints[s]);
    g.slot[s] = static_cast<std::uint32_t>(std::lower_bound(b.begin(), b.end(), a) - b.begin());
    g.sign[s] = a > 0.0 ? 1 : (a < 0.0 ? -1 : 0);
  }
  return g;
}

// Random-measure values P(b) = M([0, b]) (negated mass of [b, 0] for b < 0) at every breakpoint.
void measure_at_breakpoints(const PathGeometry& g, const StableSampler& sampler, SeededRng& stream,
                            std::vector<double>& gaps, std::vector<double>& cumulative) {
  const std::size_t n_gaps = g.gap_scale.size();
  gaps.resize(n_gaps);
  for (std::size_t l = 0; l < n_gaps; ++l) gaps[l] = g.gap_scale[l] * sampler(stream);
  cumulative.assign(n_gaps + 1, 0.0);
  for (std::size_t l = g.zero + 1; l <= n_gaps; ++l) cumulative[l] = cumulative[l - 1] + gaps[l - 1];
  for (std::size_t l = g.zero; l-- > 0;) cumulative[l] = cumulative[l + 1] - gaps[l];
}

constexpr std::uint64_t kGeometryTag = 0x67656f6dULL;

void simulate_exact_geometry(const Kernel& kernel, const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                             const std::vector<std::size_t>& idx, StableSpec spec, const SeededRng& rng,
                             std::vector<ProcessSample>& out) {
  const bool deterministic = kernel.kind == KernelKind::LevyDeterministic;
  const std::size_t n_units = deterministic ? 1 : ensemble.n_paths;
  const double mass_per_length = 1.0 / static_cast<double>(n_units);
  const double inv_alpha = 1.0 / spec.alpha();

  std::vector<PathGeometry> geometry(n_units);
  std::vector<double> endpoints(idx.size());
  for (std::size_t i = 0; i < n_units; ++i) {
    for (std::size_t s = 0; s < idx.size(); ++s)
      endpoints[s] = deterministic ? ensemble.grid.at(idx[s]) : ensemble.at(i, idx[s]);
    geometry[i] = build_geometry(endpoints, grid, mass_per_length, inv_alpha);
  }

  const StableSampler sampler(spec);
  const bool signed_kernel = kernel.kind != KernelKind::Indicator;
#pragma omp parallel
  {
    std::vector<double> gaps, cumulative;
#pragma omp for schedule(static)
    for (std::size_t r = 0; r < out.size(); ++r) {
      const SeededRng replicate = rng.substream(r);
      auto& values = out[r].values;
      for (std::size_t i = 0; i < n_units; ++i) {
        const PathGeometry& g = geometry[i];
        SeededRng stream = replicate.substream(stream_id({i, kGeometryTag}));
        measure_at_breakpoints(g, sampler, stream, gaps, cumulative);
        for (std::size_t s = 0; s < idx.size(); ++s) {
          const double v = cumulative[g.slot[s]];
          values[s] += (signed_kernel || g.sign[s] >= 0) ? v : -v;
        }
      }
    }
  }
}

void simulate_cell_field(const Kernel& kernel, const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                         const std::vector<std::size_t>& idx, StableSpec spec, const SeededRng& rng,
                         const SimulationOptions& options, std::vector<ProcessSample>& out) {
  const std::size_t n_paths = ensemble.n_paths;
  std::vector<std::size_t> slots(idx.size());
  if (kernel.kind == KernelKind::LocalTime) {
    if (kernel.local_time == nullptr) throw std::invalid_argument("LocalTime kernel needs a local time field");
    if (kernel.local_time->n_paths() != n_paths || !(kernel.local_time->grid() == grid))
      throw std::invalid_argument("local time field does not match the ensemble and x-grid");
    for (std::size_t s = 0; s < idx.size(); ++s) slots[s] = kernel.local_time->slot_of(idx[s]);
  }

  // Cell range touched by each path's kernels.
  std::vector<std::pair<std::size_t, std::size_t>> range(n_paths);
  std::size_t widest = 0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (kernel.kind == KernelKind::LocalTime) {
      range[i] = kernel.local_time->cell_range(i);
    } else {
      double lo = 0.0, hi = 0.0;
      for (auto k : idx) {
        const double a = kernel.kind == KernelKind::LevyDeterministic ? ensemble.grid.at(k) : ensemble.at(i, k);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
      range[i] = {grid.cell_of(lo), grid.cell_of(hi) + 1};
    }
    widest = std::max(widest, range[i].second - range[i].first);
  }
  if (widest * (idx.size() + 1) > options.memory_budget / sizeof(double))
    throw std::length_error("cell-field simulation exceeds the memory budget");

  const StableSampler sampler(spec);
  const double scale = cell_scale(grid.dx() / static_cast<double>(n_paths), spec);
#pragma omp parallel
  {
    std::vector<double> cells;
#pragma omp for schedule(static)
    for (std::size_t r = 0; r < out.size(); ++r) {
      const SeededRng replicate = rng.substream(r);
      auto& values = out[r].values;
      for (std::size_t i = 0; i < n_paths; ++i) {
        const auto [first, last] = range[i];
        cells.resize(last - first);
        fill_noise_cells(sampler, scale, replicate, i, first, cells);
        for (std::size_t s = 0; s < idx.size(); ++s) {
          double acc = 0.0;
          if (kernel.kind == KernelKind::LocalTime) {
            const auto row = kernel.local_time->row(i, slots[s]);
            for (std::size_t j = 0; j < row.size(); ++j) acc += row[j] * cells[j];
          } else {
            for (std::size_t j = first; j < last; ++j) {
              const double f = evaluate_kernel(kernel, ensemble, i, idx[s], grid, j);
              if (f != 0.0) acc += f * cells[j - first];
            }
          }
          values[s] += acc;
        }
      }
    }
  }
}

}  // namespace

double evaluate_kernel(const Kernel& kernel, const SubordinatorEnsemble& ensemble, std::size_t path,
                       std::size_t time_index, const SpatialGrid& grid, std::size_t cell) {
  switch (kernel.kind) {
    case KernelKind::Indicator:
      return std::abs(signed_coverage(grid, cell, ensemble.at(path, time_index)));
    case KernelKind::SignedIndicator:
      return signed_coverage(grid, cell, ensemble.at(path, time_index));
    case KernelKind::LevyDeterministic:
      return signed_coverage(grid, cell, ensemble.grid.at(time_index));
    case KernelKind::LocalTime: {
      if (kernel.local_time == nullptr) throw std::invalid_argument("LocalTime kernel needs a local time field");
      return kernel.local_time->value(path, kernel.local_time->slot_of(time_index), cell);
    }
  }
  return 0.0;
}

double ProcessSample::at(double t) const {
  for (std::size_t s = 0; s < times.size(); ++s)
    if (std::abs(times[s] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return values[s];
  throw std::out_of_range("time " + std::to_string(t) + " was not simulated");
}

std::vector<ProcessSample> simulate_process(const Kernel& kernel, const SubordinatorEnsemble& ensemble,
                                            const SpatialGrid& grid, const std::vector<double>& times,
                                            StableSpec spec, const SeededRng& rng, std::size_t n_replicates,
                                            const SimulationOptions& options) {
  if (ensemble.n_paths == 0) throw std::invalid_argument("simulate_process: empty ensemble");
  const auto idx = time_indices(ensemble.grid, times);
  check_times(ensemble, idx);

  std::vector<ProcessSample> out(n_replicates);
  for (std::size_t r = 0; r < n_replicates; ++r) {
    out[r].replicate_id = r;
    out[r].kernel = kernel.kind;
    out[r].times.resize(idx.size());
    for (std::size_t s = 0; s < idx.size(); ++s) out[r].times[s] = ensemble.grid.at(idx[s]);
    out[r].values.assign(idx.size(), 0.0);
  }
  if (idx.empty() || n_replicates == 0) return out;

  if (kernel.kind == KernelKind::LocalTime || options.scheme == IntegrationScheme::CellField)
    simulate_cell_field(kernel, ensemble, grid, idx, spec, rng, options, out);
  else
    simulate_exact_geometry(kernel, ensemble, grid, idx, spec, rng, out);
  return out;
}

std::vector<NoiseSample> simulate_noise(const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                                        std::size_t n_max, StableSpec spec, const SeededRng& rng,
                                        std::size_t n_replicates, const Kernel& kernel,
                                        const SimulationOptions& options) {
  std::vector<double> times(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) times[n] = static_cast<double>(n);
  const auto motion = simulate_process(kernel, ensemble, grid, times, spec, rng, n_replicates, options);
  std::vector<NoiseSample> out(n_replicates);
  for (std::size_t r = 0; r < n_replicates; ++r) {
    out[r].replicate_id = r;
    out[r].values.resize(n_max);
    const auto& y = motion[r].values;
    for (std::size_t n = 1; n <= n_max; ++n) out[r].values[n - 1] = y[n] - y[n - 1];
  }
  return out;
}

Feasibility feasibility_check(StableSpec spec, const SubordinatorSpec& subordinator, ProcessKind process) {
  const double alpha = spec.alpha();
  const double h_sub = subordinator.self_similarity();
  Feasibility f;
  switch (process) {
    case ProcessKind::IFSM:
      f.H = h_sub / alpha;
      f.range_lo = 0.0;
      f.range_hi = 1.0 / alpha;
      break;
    case ProcessKind::LTFSM:
      f.H = 1.0 - h_sub + h_sub / alpha;
      f.range_lo = std::min(1.0, 1.0 / alpha);
      f.range_hi = std::max(1.0, 1.0 / alpha);
      break;
    case ProcessKind::Levy:
      f.H = 1.0 / alpha;
      f.range_lo = f.range_hi = f.H;
      f.range_ok = true;
      return f;
  }
  f.range_ok = f.H > f.range_lo && f.H < f.range_hi;
  return f;
}

double truncation_mass(const SubordinatorEnsemble& ensemble, const SpatialGrid& grid, std::size_t time_index) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ensemble.n_paths; ++i)
    acc += std::max(0.0, std::abs(ensemble.at(i, time_index)) - grid.half_width());
  return acc / static_cast<double>(ensemble.n_paths);
}

}  // namespace ifsm
