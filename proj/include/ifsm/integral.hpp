#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ifsm/grid.hpp"
#include "ifsm/rng.hpp"
#include "ifsm/stable.hpp"
#include "ifsm/subordinator.hpp"

namespace ifsm {

enum class KernelKind { Indicator, SignedIndicator, LocalTime, LevyDeterministic };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

/// Integrand f_t(omega', x) of the doubly stochastic stable integral.
///   Indicator          1_[0, A_t](x), with [a, b] read as [b, a] when b < a
///   SignedIndicator    sign(A_t) 1_[0, A_t](x) = (A_t - x)_+^0 - (-x)_+^0
///   LocalTime          L_A(t, x), from a precomputed LocalTimeField
///   LevyDeterministic  1_[0, t](x), no dependence on the path
struct Kernel {
  KernelKind kind = KernelKind::Indicator;
  const LocalTimeField* local_time = nullptr;

  static Kernel indicator() { return {KernelKind::Indicator, nullptr}; }
  static Kernel signed_indicator() { return {KernelKind::SignedIndicator, nullptr}; }
  static Kernel levy() { return {KernelKind::LevyDeterministic, nullptr}; }
  static Kernel local_time_of(const LocalTimeField& field) { return {KernelKind::LocalTime, &field}; }
};

/// Cell-averaged kernel value on x-cell `cell`: the covered fraction of the cell
/// for the indicator kernels (signed for SignedIndicator), the stored density
/// for LocalTime.
double evaluate_kernel(const Kernel& kernel, const SubordinatorEnsemble& ensemble, std::size_t path,
                       std::size_t time_index, const SpatialGrid& grid, std::size_t cell);

/// One realization of a simulated process at the requested times.
struct ProcessSample {
  std::size_t replicate_id = 0;
  KernelKind kernel = KernelKind::Indicator;
  std::vector<double> times;
  std::vector<double> values;

  /// Value at time t; throws std::out_of_range if t was not simulated.
  double at(double t) const;
};

enum class IntegrationScheme {
  /// The random measure is realized on the refinement of the x-grid by each
  /// path's kernel breakpoints; indicator integrals are then exact.
  ExactGeometry,
  /// Materialized per-(path, cell) field with fractional cell coverage.
  CellField,
};

struct SimulationOptions {
  IntegrationScheme scheme = IntegrationScheme::ExactGeometry;
  std::size_t memory_budget = kDefaultMemoryBudget;
};

/// Y(t) = sum_{i,j} f_t(path_i, x_j) M_ij for each replicate. One random
/// measure per replicate, shared by all requested times; replicate r draws
/// from rng.substream(r). LocalTime always uses the CellField scheme.
std::vector<ProcessSample> simulate_process(const Kernel& kernel, const SubordinatorEnsemble& ensemble,
                                            const SpatialGrid& grid, const std::vector<double>& times,
                                            StableSpec spec, const SeededRng& rng, std::size_t n_replicates,
                                            const SimulationOptions& options = {});

struct NoiseSample {
  std::size_t replicate_id = 0;
  std::vector<double> values;  // Z(1), ..., Z(n_max)
};

/// Stable noise Z(n) = Y(n) - Y(n - 1), n = 1..n_max, from one field per replicate.
std::vector<NoiseSample> simulate_noise(const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                                        std::size_t n_max, StableSpec spec, const SeededRng& rng,
                                        std::size_t n_replicates, const Kernel& kernel = Kernel::indicator(),
                                        const SimulationOptions& options = {});

enum class ProcessKind { IFSM, LTFSM, Levy };

std::string to_string(ProcessKind kind);
ProcessKind process_kind_from_string(const std::string& name);

struct Feasibility {
  double H = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  bool range_ok = false;
};

/// Self-similarity exponent and its feasibility range:
/// IFSM H = H'/alpha in (0, 1/alpha); LTFSM H = 1 - H' + H'/alpha in (1/alpha, 1)
/// for alpha > 1 and (1, 1/alpha) for alpha < 1; Levy H = 1/alpha.
Feasibility feasibility_check(StableSpec spec, const SubordinatorSpec& subordinator,
                              ProcessKind process = ProcessKind::IFSM);

/// E'[(|A_t| - X)_+]: L1 kernel mass lost to truncating the x-axis at +-X.
double truncation_mass(const SubordinatorEnsemble& ensemble, const SpatialGrid& grid, std::size_t time_index);

}  // namespace ifsm
