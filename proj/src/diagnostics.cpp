#include "ifsm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ifsm/stats.hpp"

namespace ifsm {

ExponentFit estimate_selfsim_exponent(const std::vector<ProcessSample>& samples, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level p must lie in (0, 1)");
  if (samples.size() < kMinExponentReplicates)
    throw std::invalid_argument("exponent fit needs at least " + std::to_string(kMinExponentReplicates) +
                                " replicates");
  const auto& times = samples.front().times;
  ExponentFit fit;
  fit.p = p;
  std::vector<double> log_t, log_q, column(samples.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    if (!(times[s] > 0.0)) continue;
    for (std::size_t r = 0; r < samples.size(); ++r) column[r] = std::abs(samples[r].values[s]);
    const double q = stats::quantile(column, p);
    if (!(q > 0.0)) throw std::invalid_argument("exponent fit: degenerate (all-zero) sample at t = " +
                                                std::to_string(times[s]));
    fit.times.push_back(times[s]);
    fit.quantiles.push_back(q);
    log_t.push_back(std::log(times[s]));
    log_q.push_back(std::log(q));
  }
  if (fit.times.size() < 5) throw std::invalid_argument("exponent fit needs at least 5 positive times");
  const auto [lo, hi] = std::minmax_element(fit.times.begin(), fit.times.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-9)) throw std::invalid_argument("exponent fit times must span two decades");
  const auto line = stats::fit_line(log_t, log_q);
  fit.H_hat = line.slope;
  fit.std_error = line.slope_std_error;
  fit.r_squared = line.r_squared;
  return fit;
}

std::vector<double> log_spaced_grid_times(const TimeGrid& grid, std::size_t count, double decades) {
  if (count < 2) throw std::invalid_argument("need at least two times");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < count; ++k) {
    const double e = -decades + decades * static_cast<double>(k) / static_cast<double>(count - 1);
    const double t = grid.t_max() * std::pow(10.0, e);
    idx.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / grid.dt()))));
  }
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  if (idx.size() != count) throw std::invalid_argument("time grid too coarse for the requested log-spaced times");
  std::vector<double> times;
  for (auto k : idx) times.push_back(grid.at(k));
  return times;
}

StationarityResult stationarity_distance(const std::vector<ProcessSample>& samples, double t_span,
                                         const std::vector<double>& shifts) {
  if (samples.empty()) throw std::invalid_argument("stationarity_distance: no samples");
  StationarityResult result;
  result.shifts = shifts;
  const std::size_t n = samples.size();
  std::vector<double> base(n);
  for (std::size_t r = 0; r < n; ++r) base[r] = samples[r].at(t_span);
  for (double h : shifts) {
    std::vector<double> shifted(n);
    for (std::size_t r = 0; r < n; ++r) shifted[r] = samples[r].at(t_span + h) - samples[r].at(h);
    const double d = stats::ks_distance(shifted, base);
    result.distances.push_back(d);
    result.max_distance = std::max(result.max_distance, d);
  }
  result.critical_value = stats::ks_critical_value(0.01, n, n);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

double interval_overlap(double a0, double a1, double b0, double b1) {
  const double lo = std::max(std::min(a0, a1), std::min(b0, b1));
  const double hi = std::min(std::max(a0, a1), std::max(b0, b1));
  return hi > lo ? hi - lo : 0.0;
}

std::size_t integer_time_index(const TimeGrid& grid, std::size_t n) {
  return grid.index_of(static_cast<double>(n));
}

}  // namespace

std::vector<double> mixing_overlaps(const SubordinatorEnsemble& ensemble, std::size_t n) {
  const std::size_t k1 = integer_time_index(ensemble.grid, 1);
  const std::size_t kn = integer_time_index(ensemble.grid, n);
  const std::size_t kn1 = integer_time_index(ensemble.grid, n + 1);
  std::vector<double> out(ensemble.n_paths);
  for (std::size_t i = 0; i < ensemble.n_paths; ++i)
    out[i] = interval_overlap(0.0, ensemble.at(i, k1), ensemble.at(i, kn), ensemble.at(i, kn1));
  return out;
}

MixingCurve mixing_curve(const SubordinatorEnsemble& ensemble, std::size_t n_max) {
  if (n_max == 0) throw std::invalid_argument("mixing_curve: n_max must be positive");
  MixingCurve curve;
  for (std::size_t n = 1; n <= n_max; ++n) {
    const auto ov = mixing_overlaps(ensemble, n);
    curve.n.push_back(n);
    curve.mu.push_back(stats::mean(ov));
    curve.std_error.push_back(stats::std_error(ov));
  }
  return curve;
}

double binned_mixing_measure(const SubordinatorEnsemble& ensemble, const SpatialGrid& grid, std::size_t n) {
  const std::size_t k1 = integer_time_index(ensemble.grid, 1);
  const std::size_t kn = integer_time_index(ensemble.grid, n);
  const std::size_t kn1 = integer_time_index(ensemble.grid, n + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
    const double a1 = ensemble.at(i, k1), an = ensemble.at(i, kn), an1 = ensemble.at(i, kn1);
    const std::size_t j0 = grid.cell_of(std::max(std::min(0.0, a1), std::min(an, an1)));
    const std::size_t j1 = grid.cell_of(std::min(std::max(0.0, a1), std::max(an, an1)));
    for (std::size_t j = j0; j <= j1; ++j) {
      const double f = grid.overlap(j, std::min(0.0, a1), std::max(0.0, a1)) / grid.dx();
      const double g = grid.overlap(j, std::min(an, an1), std::max(an, an1)) / grid.dx();
      acc += f * g * grid.dx();
    }
  }
  return acc / static_cast<double>(ensemble.n_paths);
}

SymmetricLaw::SymmetricLaw(std::vector<double> samples) : abs_sorted_(std::move(samples)) {
  if (abs_sorted_.empty()) throw std::invalid_argument("SymmetricLaw needs samples");
  for (double& v : abs_sorted_) v = std::abs(v);
  std::sort(abs_sorted_.begin(), abs_sorted_.end());
  suffix_sum_.assign(abs_sorted_.size() + 1, 0.0);
  for (std::size_t i = abs_sorted_.size(); i-- > 0;) suffix_sum_[i] = suffix_sum_[i + 1] + abs_sorted_[i];
}

double SymmetricLaw::abs_cdf(double y) const {
  const auto it = std::upper_bound(abs_sorted_.begin(), abs_sorted_.end(), y);
  return static_cast<double>(it - abs_sorted_.begin()) / static_cast<double>(abs_sorted_.size());
}

double SymmetricLaw::upper_tail(double m) const { return 0.5 * (1.0 - abs_cdf(m)); }

double SymmetricLaw::integrated_tail(double m) const {
  const auto first = static_cast<std::size_t>(std::upper_bound(abs_sorted_.begin(), abs_sorted_.end(), m) -
                                              abs_sorted_.begin());
  const double count = static_cast<double>(abs_sorted_.size() - first);
  return 0.5 * (suffix_sum_[first] - m * count) / static_cast<double>(abs_sorted_.size());
}

std::vector<double> default_m_grid() {
  std::vector<double> m(50);
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = 0.1 * std::pow(1000.0, static_cast<double>(k) / 49.0);
  return m;
}

TailConstants fit_tail_constants(const SymmetricLaw& law, double beta, std::vector<double> m_grid) {
  if (!(beta > 1.0)) throw std::invalid_argument("tail index beta must exceed 1");
  if (m_grid.empty()) throw std::invalid_argument("empty M-grid");
  TailConstants c;
  c.beta = beta;
  for (double m : m_grid) {
    c.c1 = std::max(c.c1, law.upper_tail(m) * std::pow(m, beta));
    c.c2 = std::max(c.c2, law.integrated_tail(m) * std::pow(m, beta - 1.0));
  }
  c.c1 *= 1.1;
  c.c2 *= 1.1;
  c.m_grid = std::move(m_grid);
  return c;
}

void validate_tail_constants(const TailConstants& constants, const SymmetricLaw& law) {
  if (!(constants.beta > 1.0)) throw std::invalid_argument("tail index beta must exceed 1");
  for (double m : constants.m_grid) {
    if (law.upper_tail(m) > constants.c1 * std::pow(m, -constants.beta))
      throw std::invalid_argument("tail constant c1 fails P'(A_1 > M) <= c1 M^-beta at M = " + std::to_string(m));
    if (law.integrated_tail(m) > constants.c2 * std::pow(m, 1.0 - constants.beta))
      throw std::invalid_argument("tail constant c2 fails its integrated-tail bound at M = " + std::to_string(m));
  }
}

double mixing_bound_at(std::size_t n, double m, const TailConstants& constants, double hurst,
                       const SymmetricLaw& law) {
  const double scaled = m / std::pow(static_cast<double>(n), hurst);
  return 2.0 * constants.c2 * std::pow(m, 1.0 - constants.beta) + 4.0 * m * law.abs_cdf(scaled) +
         4.0 * constants.c1 * std::pow(m, 1.0 - constants.beta);
}

MixingBound mixing_bound(std::size_t n, const TailConstants& constants, double hurst, const SymmetricLaw& law) {
  validate_tail_constants(constants, law);
  MixingBound best{std::numeric_limits<double>::infinity(), 0.0};
  for (double m : constants.m_grid) {
    const double v = mixing_bound_at(n, m, constants, hurst, law);
    if (v < best.value) best = {v, m};
  }
  return best;
}

void attach_bound(MixingCurve& curve, const TailConstants& constants, double hurst, const SymmetricLaw& law) {
  curve.bound.clear();
  for (auto n : curve.n) curve.bound.push_back(mixing_bound(n, constants, hurst, law).value);
}

std::vector<ConservativityCurve> conservativity_sum(const SubordinatorEnsemble& ensemble,
                                                    const std::vector<double>& probes, std::size_t N) {
  std::vector<std::size_t> idx(N + 1);
  for (std::size_t n = 0; n <= N; ++n) idx[n] = integer_time_index(ensemble.grid, n);
  const double inv_paths = 1.0 / static_cast<double>(ensemble.n_paths);

  std::vector<ConservativityCurve> out(probes.size());
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < probes.size(); ++p) {
    const double x = probes[p];
    std::vector<std::size_t> counts(N, 0);
    for (std::size_t i = 0; i < ensemble.n_paths; ++i)
      for (std::size_t n = 0; n < N; ++n) {
        const double a = ensemble.at(i, idx[n]), b = ensemble.at(i, idx[n + 1]);
        if (x >= std::min(a, b) && x <= std::max(a, b)) ++counts[n];
      }
    auto& curve = out[p];
    curve.x = x;
    curve.S.assign(N + 1, 0.0);
    for (std::size_t n = 0; n < N; ++n) curve.S[n + 1] = curve.S[n] + static_cast<double>(counts[n]) * inv_paths;

    std::vector<double> lx, ly;
    const double lo = std::max(10.0, static_cast<double>(N) / 100.0);
    if (static_cast<double>(N) > lo) {
      for (std::size_t k = 0; k < 20; ++k) {
        const double v = lo * std::pow(static_cast<double>(N) / lo, static_cast<double>(k) / 19.0);
        const auto m = std::min<std::size_t>(N, static_cast<std::size_t>(std::llround(v)));
        if (curve.S[m] > 0.0 && (lx.empty() || std::log(static_cast<double>(m)) > lx.back())) {
          lx.push_back(std::log(static_cast<double>(m)));
          ly.push_back(std::log(curve.S[m]));
        }
      }
    }
    if (lx.size() >= 2) curve.growth_exponent = stats::fit_line(lx, ly).slope;
  }
  return out;
}

std::vector<ExtremeValuePoint> extreme_value_stat(const std::vector<NoiseSample>& noise,
                                                  const std::vector<std::size_t>& n_list, double alpha) {
  if (noise.empty()) throw std::invalid_argument("extreme_value_stat: no noise replicates");
  std::vector<ExtremeValuePoint> out;
  std::vector<double> stat(noise.size());
  for (auto n : n_list) {
    if (n == 0 || n > noise.front().values.size())
      throw std::invalid_argument("extreme_value_stat: n outside the simulated noise length");
    const double scale = std::pow(static_cast<double>(n), -1.0 / alpha);
    for (std::size_t r = 0; r < noise.size(); ++r) {
      const auto& z = noise[r].values;
      stat[r] = scale * *std::max_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
    }
    out.push_back({n, stats::median(stat)});
  }
  return out;
}

}  // namespace ifsm
