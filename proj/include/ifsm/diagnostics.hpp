#pragma once

#include <cstddef>
#include <vector>

#include "ifsm/integral.hpp"
#include "ifsm/subordinator.hpp"

namespace ifsm {

// ---------------------------------------------------------------------------
// Self-similarity

struct ExponentFit {
  double H_hat = 0.0;
  double std_error = 0.0;
  double p = 0.5;
  std::vector<double> times;
  std::vector<double> quantiles;
  double r_squared = 0.0;
};

inline constexpr std::size_t kMinExponentReplicates = 1000;

/// Slope of log q_p(|Y(t)|) against log t over every positive simulated time.
/// Needs >= 5 times spanning >= 2 decades and >= 1000 replicates; quantiles
/// are used because |Y| has no finite alpha-th moment.
ExponentFit estimate_selfsim_exponent(const std::vector<ProcessSample>& samples, double p = 0.5);

/// Times log-spaced over [t_max / 100, t_max], snapped to the grid.
std::vector<double> log_spaced_grid_times(const TimeGrid& grid, std::size_t count, double decades = 2.0);

// ---------------------------------------------------------------------------
// Stationarity

struct StationarityResult {
  std::vector<double> shifts;
  std::vector<double> distances;
  double max_distance = 0.0;
  double critical_value = 0.0;  // 1% two-sample KS critical value
};

/// Max over shifts h of the two-sample KS distance between {Y(t_span + h) - Y(h)} and {Y(t_span)}.
StationarityResult stationarity_distance(const std::vector<ProcessSample>& samples, double t_span,
                                         const std::vector<double>& shifts);

// ---------------------------------------------------------------------------
// Mixing

/// mu_n = (P' x Lebesgue){(w, x): x in [0, A_1], x in [A_n, A_{n+1}]}.
/// The compact set of the mixing criterion is instantiated as K = {-1, 1}
/// with eps in (0, 1), which the {-1, 0, 1}-valued increment kernel reduces to
/// this overlap measure.
struct MixingCurve {
  std::vector<std::size_t> n;
  std::vector<double> mu;
  std::vector<double> std_error;
  std::vector<double> bound;  // empty until attach_bound
};

/// Overlap lengths |[0, A_1] cap [A_n, A_{n+1}]| per path, for one n.
std::vector<double> mixing_overlaps(const SubordinatorEnsemble& ensemble, std::size_t n);

/// Exact interval arithmetic per path for n = 1..n_max; needs integer times up to n_max + 1.
MixingCurve mixing_curve(const SubordinatorEnsemble& ensemble, std::size_t n_max);

/// mu_n estimated from the x-binned kernels of the integral engine's grid.
double binned_mixing_measure(const SubordinatorEnsemble& ensemble, const SpatialGrid& grid, std::size_t n);

/// Constants with P'(A_1 > M) <= c1 M^-beta and int_M^inf P'(A_1 > x) dx <= c2 M^(1-beta)
/// on every probed M.
struct TailConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double beta = 2.0;
  std::vector<double> m_grid;
};

/// Empirical law of A_1, symmetrized (the bound uses the symmetry of A_1).
class SymmetricLaw {
 public:
  explicit SymmetricLaw(std::vector<double> samples);
  /// P'(|A_1| <= y)
  double abs_cdf(double y) const;
  /// P'(A_1 > M) as half the two-sided tail.
  double upper_tail(double m) const;
  /// int_M^inf P'(A_1 > x) dx = E'[(|A_1| - M)_+] / 2.
  double integrated_tail(double m) const;
  std::size_t size() const noexcept { return abs_sorted_.size(); }

 private:
  std::vector<double> abs_sorted_;
  std::vector<double> suffix_sum_;
};

/// Log-spaced M-grid on [0.1, 100] with 50 points.
std::vector<double> default_m_grid();

/// Smallest constants valid on the grid, times a 1.1 safety factor.
TailConstants fit_tail_constants(const SymmetricLaw& law, double beta, std::vector<double> m_grid = default_m_grid());

/// Throws std::invalid_argument if the constants violate their inequalities at any probed M.
void validate_tail_constants(const TailConstants& constants, const SymmetricLaw& law);

struct MixingBound {
  double value = 0.0;
  double m = 0.0;
};

/// 2 c2 M^(1-beta) + 4 M P'(|A_1| <= M / n^H') + 4 c1 M^-beta at a fixed M.
double mixing_bound_at(std::size_t n, double m, const TailConstants& constants, double hurst, const SymmetricLaw& law);

/// Minimum of mixing_bound_at over the constants' M-grid; validates the constants first.
MixingBound mixing_bound(std::size_t n, const TailConstants& constants, double hurst, const SymmetricLaw& law);

/// Fills curve.bound with mixing_bound(n) for every n of the curve.
void attach_bound(MixingCurve& curve, const TailConstants& constants, double hurst, const SymmetricLaw& law);

// ---------------------------------------------------------------------------
// Conservativity

struct ConservativityCurve {
  double x = 0.0;
  std::vector<double> S;  // S[N] = sum_{n < N} mean over paths of 1_[A_n, A_{n+1}](x), N = 0..N_max
  double growth_exponent = 0.0;
};

/// Partial sums of the spectral-function alpha-norms at probe points; needs
/// integer times 0..N on the grid. The growth exponent is the log-log slope
/// over N in [max(10, N/100), N].
std::vector<ConservativityCurve> conservativity_sum(const SubordinatorEnsemble& ensemble,
                                                    const std::vector<double>& probes, std::size_t N);

// ---------------------------------------------------------------------------
// Extreme values

struct ExtremeValuePoint {
  std::size_t n = 0;
  double median = 0.0;
};

/// Median over replicates of n^(-1/alpha) max_{j <= n} Z(j).
std::vector<ExtremeValuePoint> extreme_value_stat(const std::vector<NoiseSample>& noise,
                                                  const std::vector<std::size_t>& n_list, double alpha);

}  // namespace ifsm
