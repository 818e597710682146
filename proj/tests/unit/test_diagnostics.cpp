#include <doctest.h>

#include <cmath>

#include "ifsm/diagnostics.hpp"
#include "ifsm/runner.hpp"
#include "unit/helpers.hpp"

using namespace ifsm;

namespace {

SubordinatorEnsemble explicit_paths(const TimeGrid& grid, const std::vector<std::vector<double>>& paths) {
  SubordinatorEnsemble e{SubordinatorSpec::fbm(0.5), grid, paths.size(), 0, PathSynthesis::External, {}};
  for (const auto& p : paths) e.values.insert(e.values.end(), p.begin(), p.end());
  return e;
}

// Exactly self-similar samples Y(t) = t^H X.
std::vector<ProcessSample> scaled_samples(double h, const std::vector<double>& times, std::size_t n) {
  SeededRng rng(60);
  std::vector<ProcessSample> out;
  for (std::size_t r = 0; r < n; ++r) {
    const double x = sample_sas(StableSpec(1.5), 1.0, rng);
    ProcessSample s{r, KernelKind::Indicator, times, {}};
    for (double t : times) s.values.push_back(std::pow(t, h) * x);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("log-spaced grid times span two decades on the grid") {
  const TimeGrid grid(10.0, 1000);
  const auto t = log_spaced_grid_times(grid, 8);
  REQUIRE(t.size() == 8);
  CHECK(t.front() == doctest::Approx(0.1));
  CHECK(t.back() == doctest::Approx(10.0));
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(grid.contains(t[k]));
    if (k) CHECK(t[k] > t[k - 1]);
  }
}

TEST_CASE("self-similarity fit is exact on scaled samples") {
  const auto times = log_spaced_grid_times(TimeGrid(10.0, 1000), 8);
  const auto fit = estimate_selfsim_exponent(scaled_samples(0.37, times, 1000));
  CHECK(fit.H_hat == doctest::Approx(0.37));
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(estimate_selfsim_exponent(scaled_samples(0.37, times, 999)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_selfsim_exponent(scaled_samples(0.37, {1, 2, 3, 4, 5, 6}, 1000)), std::invalid_argument);
}

TEST_CASE("stationarity: random walk passes, a scaled control fails") {
  // Y(t) = sum of i.i.d. unit-step increments has stationary increments.
  const std::vector<double> times{0, 1, 2, 5, 6, 10, 11};
  SeededRng rng(61);
  std::vector<ProcessSample> walk, scaled;
  for (std::size_t r = 0; r < 4000; ++r) {
    std::vector<double> inc(11);
    for (auto& v : inc) v = sample_sas(StableSpec(1.5), 1.0, rng);
    ProcessSample a{r, KernelKind::Indicator, times, {}}, b = a;
    for (double t : times) {
      double y = 0.0;
      for (int k = 0; k < t; ++k) y += inc[k];
      a.values.push_back(y);
      b.values.push_back(y * std::sqrt(1.0 + t));
    }
    walk.push_back(a);
    scaled.push_back(b);
  }
  const auto ok = stationarity_distance(walk, 1.0, {1, 5, 10});
  CHECK(ok.distances.size() == 3);
  CHECK(ok.max_distance < ok.critical_value);
  CHECK(ok.critical_value == doctest::Approx(stats::ks_critical_value(0.01, 4000, 4000)));
  CHECK(stationarity_distance(scaled, 1.0, {1, 5, 10}).max_distance > ok.critical_value);
}

TEST_CASE("mixing overlaps by interval arithmetic") {
  // Path 0: [0, A_1] = [0, 2]; n = 1: [A_1, A_2] = [1, 2]; n = 2: [A_2, A_3] = [1, 3].
  // Path 1: [0, A_1] = [-1, 0]; n = 1: [-1, 1]; n = 2: [1, 2].
  const TimeGrid grid(3.0, 3);
  const auto ens = explicit_paths(grid, {{0, 2, 1, 3}, {0, -1, 1, 2}});
  CHECK(mixing_overlaps(ens, 1) == std::vector<double>{1.0, 1.0});
  CHECK(mixing_overlaps(ens, 2) == std::vector<double>{1.0, 0.0});
  const auto curve = mixing_curve(ens, 2);
  CHECK(curve.n == std::vector<std::size_t>{1, 2});
  CHECK(curve.mu == std::vector<double>{1.0, 0.5});
}

TEST_CASE("binned mixing measure converges to the exact overlap") {
  const TimeGrid grid(6.0, 6);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 300, SeededRng(62));
  const auto exact = mixing_curve(ens, 4);
  for (std::size_t n : {1, 4}) {
    const double binned = binned_mixing_measure(ens, SpatialGrid(8.0, 4000), n);
    CHECK(binned == doctest::Approx(exact.mu[n - 1]).epsilon(0.01));
  }
}

TEST_CASE("symmetrized law of A_1") {
  const SymmetricLaw law({1.0, -2.0, 3.0, -4.0});
  CHECK(law.abs_cdf(2.5) == doctest::Approx(0.5));
  CHECK(law.upper_tail(2.5) == doctest::Approx(0.25));
  CHECK(law.integrated_tail(2.5) == doctest::Approx((0.5 + 1.5) / 4 / 2));
  CHECK(law.integrated_tail(0.0) == doctest::Approx(10.0 / 4 / 2));
}

TEST_CASE("tail constants and the mixing bound") {
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), TimeGrid(1.0, 64), 5000, SeededRng(63));
  const SymmetricLaw law(ens.column(64));
  const auto c = fit_tail_constants(law, 2.0);
  CHECK(c.m_grid.size() == 50);
  CHECK(c.m_grid.front() == doctest::Approx(0.1));
  CHECK(c.m_grid.back() == doctest::Approx(100.0));
  CHECK_NOTHROW(validate_tail_constants(c, law));
  for (double m : c.m_grid) {
    CHECK(law.upper_tail(m) <= c.c1 * std::pow(m, -2.0));
    CHECK(law.integrated_tail(m) <= c.c2 * std::pow(m, -1.0));
  }
  TailConstants bad = c;
  bad.c1 *= 0.1;
  CHECK_THROWS_AS(validate_tail_constants(bad, law), std::invalid_argument);
  const double m = 3.0;
  const double manual = 2 * c.c2 * std::pow(m, -1.0) + 4 * m * law.abs_cdf(m / std::pow(50.0, 0.5)) +
                        4 * m * c.c1 * std::pow(m, -2.0);
  CHECK(mixing_bound_at(50, m, c, 0.5, law) == doctest::Approx(manual));
  const auto b = mixing_bound(50, c, 0.5, law);
  for (double mm : c.m_grid) CHECK(b.value <= mixing_bound_at(50, mm, c, 0.5, law));
  // The bound decreases to zero in n.
  CHECK(mixing_bound(1000, c, 0.5, law).value < mixing_bound(10, c, 0.5, law).value);
}

TEST_CASE("conservativity sums count crossings") {
  // A_n = n: probe 0.5 lies in [A_0, A_1] only; probe -0.5 never.
  const std::size_t N = 100;
  const TimeGrid grid(static_cast<double>(N), N);
  std::vector<double> path(N + 1);
  for (std::size_t n = 0; n <= N; ++n) path[n] = static_cast<double>(n);
  const auto curves = conservativity_sum(explicit_paths(grid, {path}), {0.5, -0.5}, N);
  REQUIRE(curves.size() == 2);
  CHECK(curves[0].S[0] == 0.0);
  CHECK(curves[0].S[1] == 1.0);
  CHECK(curves[0].S[N] == 1.0);
  CHECK(curves[1].S[N] == 0.0);
}

TEST_CASE("conservativity sums are nondecreasing for random paths") {
  const std::size_t N = 500;
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), TimeGrid(N, N), 50, SeededRng(64));
  for (const auto& c : conservativity_sum(ens, {0.0, 0.5}, N))
    for (std::size_t n = 1; n <= N; ++n) CHECK(c.S[n] >= c.S[n - 1]);
}

TEST_CASE("extreme-value statistic") {
  std::vector<NoiseSample> noise;
  for (std::size_t r = 0; r < 3; ++r) {
    NoiseSample s{r, std::vector<double>(100, 0.0)};
    s.values[5] = static_cast<double>(r + 1);
    s.values[50] = 10.0 * static_cast<double>(r + 1);
    noise.push_back(s);
  }
  const auto pts = extreme_value_stat(noise, {10, 100}, 2.0);
  CHECK(pts[0].n == 10);
  CHECK(pts[0].median == doctest::Approx(2.0 / std::sqrt(10.0)));
  CHECK(pts[1].median == doctest::Approx(20.0 / 10.0));
}

TEST_CASE("stationarity distance at zero shift is zero") {
  const auto samples = scaled_samples(0.4, {0.0, 1.0}, 500);
  CHECK(stationarity_distance(samples, 1.0, {0.0}).max_distance == 0.0);
}

TEST_CASE("overlap vanishes when [A_n, A_n+1] lies on the other side of zero") {
  const TimeGrid grid(3.0, 3);
  const auto ens = explicit_paths(grid, {{0.0, 1.5, -0.5, -2.0}});
  CHECK(mixing_overlaps(ens, 2) == std::vector<double>{0.0});
}

TEST_CASE("mixing bound evaluated directly and in the large-n limit") {
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), TimeGrid(1.0, 64), 5000, SeededRng(65));
  const SymmetricLaw law(ens.column(64));
  const auto c = fit_tail_constants(law, 2.0);
  CHECK(mixing_bound_at(1, 1.0, c, 0.5, law) == doctest::Approx(2 * c.c2 + 4 * law.abs_cdf(1.0) + 4 * c.c1));
  // Fix M, then let n grow: the middle term vanishes and only the tail terms remain.
  const double m = 100.0;
  double prev = INFINITY;
  double smallest = INFINITY;
  for (double a : ens.column(64)) if (a != 0.0) smallest = std::min(smallest, std::abs(a));
  const double n_far = std::pow(2 * m / smallest, 2.0);
  REQUIRE(n_far < 1e19);
  for (double n : {1e2, 1e4, 1e6, 1e8, n_far}) {
    const double b = mixing_bound_at(static_cast<std::size_t>(n), m, c, 0.5, law);
    CHECK(b <= prev);
    prev = b;
  }
  CHECK(prev == doctest::Approx(2 * c.c2 * std::pow(m, -1.0) + 4 * c.c1 * std::pow(m, -1.0)));
  CHECK(prev < 0.05);
  // Tying M = n^(H'/2) keeps the middle term near 4 * 2 * phi(0) instead.
  for (double n : {1e2, 1e4}) {
    const double mm = std::pow(n, 0.25);
    const double middle = 4 * mm * law.abs_cdf(mm / std::sqrt(n));
    CHECK(middle == doctest::Approx(8.0 / std::sqrt(2 * M_PI)).epsilon(0.15));
  }
}

TEST_CASE("extreme statistic at n = 1 is the median of Z(1)") {
  SeededRng rng(66);
  std::vector<NoiseSample> noise;
  std::vector<double> z1;
  for (std::size_t r = 0; r < 101; ++r) {
    NoiseSample s{r, {sample_sas(StableSpec(1.5), 1.0, rng), 0.0}};
    z1.push_back(s.values[0]);
    noise.push_back(s);
  }
  CHECK(extreme_value_stat(noise, {1}, 1.5)[0].median == stats::median(z1));
}

TEST_CASE("LT-FSM self-similarity exponent 1 - H' + H'/alpha") {
  RunConfig c;
  c.process = ProcessKind::LTFSM;
  c.n_paths = 300;
  c.experiments = {Experiment::selfsim};
  const auto report = run(c);
  const double h_hat = report.results.at(0).metrics.at("H_hat");
  CHECK(std::abs(h_hat - (1.0 - 0.5 + 0.5 / 1.5)) < 0.05);
}

}
