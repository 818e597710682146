#include "ifsm/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>
#include <unsupported/Eigen/FFT>

#include "ifsm/stable.hpp"

namespace ifsm {

std::string to_string(SubordinatorKind kind) { return kind == SubordinatorKind::FBM ? "FBM" : "StableLevy"; }

SubordinatorKind subordinator_kind_from_string(const std::string& name) {
  if (name == "FBM" || name == "fbm") return SubordinatorKind::FBM;
  if (name == "StableLevy" || name == "levy" || name == "Levy") return SubordinatorKind::StableLevy;
  throw std::invalid_argument("unknown subordinator kind '" + name + "'");
}

std::string to_string(PathSynthesis method) {
  switch (method) {
    case PathSynthesis::CirculantEmbedding: return "circulant-embedding";
    case PathSynthesis::Cholesky: return "cholesky";
    case PathSynthesis::IndependentIncrements: return "independent-increments";
    case PathSynthesis::External: return "external";
  }
  return "unknown";
}

SubordinatorSpec SubordinatorSpec::fbm(double hurst, double sigma) {
  SubordinatorSpec s{SubordinatorKind::FBM, hurst, 2.0, sigma};
  s.validate();
  return s;
}

SubordinatorSpec SubordinatorSpec::stable_levy(double beta, double sigma) {
  SubordinatorSpec s{SubordinatorKind::StableLevy, 1.0 / beta, beta, sigma};
  s.validate();
  return s;
}

double SubordinatorSpec::self_similarity() const noexcept {
  return kind == SubordinatorKind::FBM ? hurst : 1.0 / beta;
}

void SubordinatorSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("subordinator sigma must be positive");
  if (kind == SubordinatorKind::FBM) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("FBM Hurst exponent must lie in (0, 1)");
  } else if (!(beta > 1.0 && beta <= 2.0)) {
    throw std::invalid_argument("Levy subordinator beta must lie in (1, 2]");
  }
}

std::vector<double> SubordinatorEnsemble::column(std::size_t k) const {
  std::vector<double> out(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) out[i] = at(i, k);
  return out;
}

double fgn_autocovariance(double hurst, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

namespace {

SubordinatorEnsemble make_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                   const SeededRng& rng, PathSynthesis method) {
  if (n_paths == 0) throw std::invalid_argument("ensemble needs at least one path");
  return SubordinatorEnsemble{spec, grid, n_paths, rng.seed(), method,
                              std::vector<double>(n_paths * grid.n_points(), 0.0)};
}

void integrate_increments(std::span<double> path, std::span<const double> increments, double scale) {
  path[0] = 0.0;
  double acc = 0.0;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    acc += scale * increments[k];
    path[k + 1] = acc;
  }
}

// Eigenvalues of the circulant embedding of the fGn covariance; empty when not PSD.
std::vector<double> circulant_eigenvalues(double hurst, std::size_t n) {
  const std::size_t m = 2 * n;
  std::vector<double> row(m);
  for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(hurst, k);
  for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, row);
  std::vector<double> lambda(m);
  double peak = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    lambda[k] = spectrum[k].real();
    peak = std::max(peak, std::abs(lambda[k]));
  }
  for (double& l : lambda) {
    if (l < -1e-10 * peak) return {};
    l = std::max(l, 0.0);
  }
  return lambda;
}

}  // namespace

SubordinatorEnsemble sample_fbm_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                         const SeededRng& rng, const FbmOptions& options) {
  spec.validate();
  if (spec.kind != SubordinatorKind::FBM) throw std::invalid_argument("sample_fbm_ensemble needs an FBM spec");
  const std::size_t n = grid.n_steps();
  // Increments over dt have standard deviation sigma * dt^H.
  const double step_scale = spec.sigma * std::pow(grid.dt(), spec.hurst);

  std::vector<double> lambda;
  if (!options.force_cholesky && n > options.cholesky_max_steps) {
    lambda = circulant_eigenvalues(spec.hurst, n);
    if (lambda.empty())
      spdlog::warn("circulant embedding of fGn (H={}, n={}) is not PSD; using dense Cholesky", spec.hurst, n);
  }

  if (!lambda.empty()) {
    auto ens = make_ensemble(spec, grid, n_paths, rng, PathSynthesis::CirculantEmbedding);
    const std::size_t m = 2 * n;
    std::vector<double> amplitude(m);
    for (std::size_t k = 0; k < m; ++k) amplitude[k] = std::sqrt(lambda[k] / static_cast<double>(m));
#pragma omp parallel
    {
      Eigen::FFT<double> fft;
      std::vector<std::complex<double>> w(m), out(m);
      std::vector<double> incr(n);
#pragma omp for schedule(static)
      for (std::size_t i = 0; i < n_paths; ++i) {
        SeededRng stream = rng.substream(i);
        for (std::size_t k = 0; k < m; ++k) {
          const double re = standard_normal(stream);
          const double im = standard_normal(stream);
          w[k] = amplitude[k] * std::complex<double>(re, im);
        }
        fft.fwd(out, w);
        for (std::size_t k = 0; k < n; ++k) incr[k] = out[k].real();
        integrate_increments(ens.path(i), incr, step_scale);
      }
    }
    return ens;
  }

  auto ens = make_ensemble(spec, grid, n_paths, rng, PathSynthesis::Cholesky);
  Eigen::MatrixXd cov(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) cov(a, b) = fgn_autocovariance(spec.hurst, a > b ? a - b : b - a);
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("fGn covariance is not positive definite");
  const Eigen::MatrixXd factor = llt.matrixL();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_paths; ++i) {
    SeededRng stream = rng.substream(i);
    Eigen::VectorXd z(n);
    for (std::size_t k = 0; k < n; ++k) z[k] = standard_normal(stream);
    const Eigen::VectorXd incr = factor * z;
    integrate_increments(ens.path(i), {incr.data(), n}, step_scale);
  }
  return ens;
}

SubordinatorEnsemble sample_levy_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                          const SeededRng& rng) {
  spec.validate();
  if (spec.kind != SubordinatorKind::StableLevy)
    throw std::invalid_argument("sample_levy_ensemble needs a StableLevy spec");
  auto ens = make_ensemble(spec, grid, n_paths, rng, PathSynthesis::IndependentIncrements);
  const StableSampler sampler{StableSpec(spec.beta)};
  const double step_scale = spec.sigma * std::pow(grid.dt(), 1.0 / spec.beta);
  const std::size_t n = grid.n_steps();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_paths; ++i) {
    SeededRng stream = rng.substream(i);
    auto path = ens.path(i);
    double acc = 0.0;
    path[0] = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      acc += step_scale * sampler(stream);
      path[k] = acc;
    }
  }
  return ens;
}

SubordinatorEnsemble sample_ensemble(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                     const SeededRng& rng) {
  return spec.kind == SubordinatorKind::FBM ? sample_fbm_ensemble(spec, grid, n_paths, rng)
                                            : sample_levy_ensemble(spec, grid, n_paths, rng);
}

RecurrenceReport recurrence_check(const SubordinatorEnsemble& ensemble, double level) {
  if (ensemble.n_paths == 0) throw std::invalid_argument("recurrence_check: empty ensemble");
  std::size_t up = 0, down = 0;
  for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
    const auto p = ensemble.path(i);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    if (*hi > level) ++up;
    if (*lo < -level) ++down;
  }
  const double n = static_cast<double>(ensemble.n_paths);
  return {static_cast<double>(up) / n, static_cast<double>(down) / n};
}

// ---------------------------------------------------------------------------
// Local time

LocalTimeField::LocalTimeField(const SpatialGrid& grid, std::vector<std::size_t> time_indices, std::size_t n_paths)
    : grid_(grid), time_indices_(std::move(time_indices)), ranges_(n_paths), offsets_(n_paths + 1, 0),
      truncated_(n_paths * time_indices_.size(), 0.0) {}

std::size_t LocalTimeField::slot_of(std::size_t time_index) const {
  const auto it = std::lower_bound(time_indices_.begin(), time_indices_.end(), time_index);
  if (it == time_indices_.end() || *it != time_index)
    throw std::invalid_argument("local time field has no slot for grid index " + std::to_string(time_index));
  return static_cast<std::size_t>(it - time_indices_.begin());
}

std::span<const double> LocalTimeField::row(std::size_t path, std::size_t slot) const {
  const auto [first, last] = ranges_[path];
  const std::size_t width = last - first;
  return {data_.data() + offsets_[path] + slot * width, width};
}

double LocalTimeField::value(std::size_t path, std::size_t slot, std::size_t cell) const {
  const auto [first, last] = ranges_[path];
  if (cell < first || cell >= last) return 0.0;
  return row(path, slot)[cell - first];
}

double LocalTimeField::max_truncated_fraction(const TimeGrid& time_grid) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_paths(); ++i)
    for (std::size_t s = 0; s < time_indices_.size(); ++s) {
      const double t = time_grid.at(time_indices_[s]);
      if (t > 0.0) worst = std::max(worst, truncated_mass(i, s) / t);
    }
  return worst;
}

LocalTimeField compute_local_time(const SubordinatorEnsemble& ensemble, const SpatialGrid& x_grid,
                                  std::vector<std::size_t> time_indices) {
  std::sort(time_indices.begin(), time_indices.end());
  time_indices.erase(std::unique(time_indices.begin(), time_indices.end()), time_indices.end());
  for (auto k : time_indices)
    if (k >= ensemble.n_points()) throw std::invalid_argument("local time requested beyond the time grid");

  const std::size_t n_paths = ensemble.n_paths;
  const std::size_t n_slots = time_indices.size();
  LocalTimeField field(x_grid, time_indices, n_paths);

  const std::size_t last_index = time_indices.empty() ? 0 : time_indices.back();
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto p = ensemble.path(i).subspan(0, last_index + 1);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    const std::size_t first = x_grid.cell_of(*lo);
    const std::size_t last = x_grid.cell_of(*hi) + 1;
    field.ranges_[i] = {first, last};
    field.offsets_[i + 1] = field.offsets_[i] + n_slots * (last - first);
  }
  field.data_.assign(field.offsets_.back(), 0.0);

  const double dt = ensemble.grid.dt();
  const double inv_dx = 1.0 / x_grid.dx();
  const double X = x_grid.half_width();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_paths; ++i) {
    const auto [first, last] = field.ranges_[i];
    const std::size_t width = last - first;
    std::vector<double> occupation(width, 0.0);
    double truncated = 0.0;
    const auto p = ensemble.path(i);
    std::size_t slot = 0;
    auto snapshot = [&](std::size_t k) {
      while (slot < n_slots && time_indices[slot] == k) {
        double* out = field.data_.data() + field.offsets_[i] + slot * width;
        for (std::size_t j = 0; j < width; ++j) out[j] = occupation[j] * inv_dx;
        field.truncated_[i * n_slots + slot] = truncated;
        ++slot;
      }
    };
    snapshot(0);
    for (std::size_t k = 1; k <= last_index; ++k) {
      const double a = std::min(p[k - 1], p[k]);
      const double b = std::max(p[k - 1], p[k]);
      if (b == a) {
        if (a < -X || a > X)
          truncated += dt;
        else
          occupation[x_grid.cell_of(a) - first] += dt;
      } else {
        const double rate = dt / (b - a);
        const double inside_lo = std::max(a, -X);
        const double inside_hi = std::min(b, X);
        double deposited = 0.0;
        if (inside_hi > inside_lo) {
          const std::size_t j0 = x_grid.cell_of(inside_lo);
          const std::size_t j1 = x_grid.cell_of(inside_hi);
          for (std::size_t j = j0; j <= j1; ++j) {
            const double share = rate * x_grid.overlap(j, inside_lo, inside_hi);
            occupation[j - first] += share;
            deposited += share;
          }
        }
        truncated += dt - deposited;
      }
      snapshot(k);
    }
  }

  const double worst = field.max_truncated_fraction(ensemble.grid);
  if (worst > 1e-3)
    spdlog::warn("local time: up to {:.3g}% of occupation mass falls outside [-{}, {}]", 100.0 * worst, X, X);
  return field;
}

}  // namespace ifsm
