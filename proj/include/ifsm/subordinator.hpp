#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ifsm/grid.hpp"
#include "ifsm/rng.hpp"

namespace ifsm {

enum class SubordinatorKind { FBM, StableLevy };

std::string to_string(SubordinatorKind kind);
SubordinatorKind subordinator_kind_from_string(const std::string& name);

/// The subordinating SSSI process A_t. FBM is parameterized by its Hurst
/// exponent with Var(A_1) = sigma^2; the SbS Levy motion has A_1 ~ S_beta(sigma).
struct SubordinatorSpec {
  SubordinatorKind kind = SubordinatorKind::FBM;
  double hurst = 0.5;
  double beta = 2.0;
  double sigma = 1.0;

  static SubordinatorSpec fbm(double hurst, double sigma = 1.0);
  static SubordinatorSpec stable_levy(double beta, double sigma = 1.0);

  /// H' for FBM, 1 / beta for the Levy motion.
  double self_similarity() const noexcept;
  /// Throws std::invalid_argument when outside 0 < H' < 1 (FBM) or 1 < beta <= 2 (Levy).
  void validate() const;

  bool operator==(const SubordinatorSpec&) const = default;
};

enum class PathSynthesis { CirculantEmbedding, Cholesky, IndependentIncrements, External };

std::string to_string(PathSynthesis method);

/// n_paths discretized sample paths, row-major n_paths x n_points.
struct SubordinatorEnsemble {
  SubordinatorSpec spec;
  TimeGrid grid;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  PathSynthesis method = PathSynthesis::External;
  std::vector<double> values;

  std::size_t n_points() const noexcept { return grid.n_points(); }
  std::span<const double> path(std::size_t i) const { return {values.data() + i * n_points(), n_points()}; }
  std::span<double> path(std::size_t i) { return {values.data() + i * n_points(), n_points()}; }
  double at(std::size_t i, std::size_t k) const { return values[i * n_points() + k]; }

  /// Values of every path at grid index k.
  std::vector<double> column(std::size_t k) const;
};

struct FbmOptions {
  /// Grids with at most this many steps use the dense Cholesky factor.
  std::size_t cholesky_max_steps = 32;
  bool force_cholesky = false;
};

/// FBM paths with Cov(A_s, A_t) = sigma^2 / 2 (s^2H + t^2H - |t - s|^2H), by
/// circulant embedding of the fractional Gaussian noise. Falls back to a dense
/// Cholesky factorization on small grids or when the embedding is not PSD.
SubordinatorEnsemble sample_fbm_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                         const SeededRng& rng, const FbmOptions& options = {});

/// SbS Levy paths: increments i.i.d. S_beta(sigma dt^(1/beta)).
SubordinatorEnsemble sample_levy_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                          const SeededRng& rng);

/// Dispatches on spec.kind.
SubordinatorEnsemble sample_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                     const SeededRng& rng);

/// Fractional Gaussian noise autocovariance at lag k for unit variance steps.
double fgn_autocovariance(double hurst, std::size_t lag);

struct RecurrenceReport {
  double frac_exceed_up = 0.0;
  double frac_exceed_down = 0.0;
};

/// Fraction of paths whose running max exceeds +level (running min drops below -level) by t_max.
RecurrenceReport recurrence_check(const SubordinatorEnsemble& ensemble, double level);

/// Occupation densities L(t_k, x_j) per path at selected grid times, from the
/// piecewise-linear interpolation of each path: a step from a to b deposits its
/// dt across the cells between a and b in proportion to overlap length.
class LocalTimeField {
 public:
  LocalTimeField(const SpatialGrid& grid, std::vector<std::size_t> time_indices, std::size_t n_paths);

  const SpatialGrid& grid() const noexcept { return grid_; }
  const std::vector<std::size_t>& time_indices() const noexcept { return time_indices_; }
  std::size_t n_paths() const noexcept { return ranges_.size(); }

  /// Slot of a grid time index inside this field; throws if absent.
  std::size_t slot_of(std::size_t time_index) const;

  /// Half-open cell range [first, last) outside which the path's densities vanish.
  std::pair<std::size_t, std::size_t> cell_range(std::size_t path) const { return ranges_[path]; }

  /// Densities over cell_range(path) at the given slot.
  std::span<const double> row(std::size_t path, std::size_t slot) const;

  double value(std::size_t path, std::size_t slot, std::size_t cell) const;

  /// Occupation time that fell outside [-X, X] for (path, slot).
  double truncated_mass(std::size_t path, std::size_t slot) const {
    return truncated_[path * time_indices_.size() + slot];
  }
  /// Largest truncated fraction of occupation time over all (path, slot) with t > 0.
  double max_truncated_fraction(const TimeGrid& time_grid) const;

 private:
  friend LocalTimeField compute_local_time(const SubordinatorEnsemble&, const SpatialGrid&,
                                           std::vector<std::size_t>);

  SpatialGrid grid_;
  std::vector<std::size_t> time_indices_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
  std::vector<double> truncated_;
};

/// Logs a warning when more than 0.1% of occupation mass falls outside the x-grid.
LocalTimeField compute_local_time(const SubordinatorEnsemble& ensemble, const SpatialGrid& x_grid,
                                  std::vector<std::size_t> time_indices);

}  // namespace ifsm
