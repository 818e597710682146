#include <doctest.h>

#include <cmath>

#include "ifsm/oracle.hpp"
#include "unit/helpers.hpp"

using namespace ifsm;

namespace {

// Paths given by their values at every grid point.
SubordinatorEnsemble explicit_paths(const TimeGrid& grid, const std::vector<std::vector<double>>& paths) {
  SubordinatorEnsemble e{SubordinatorSpec::fbm(0.5), grid, paths.size(), 0, PathSynthesis::External, {}};
  for (const auto& p : paths) e.values.insert(e.values.end(), p.begin(), p.end());
  return e;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("linear form text round-trips") {
  const LinearForm f{{{0.5, 2.0, 1.0}, {-1.25, 3.0, 0.0}}};
  CHECK(LinearForm::parse(f.to_string()) == f);
  CHECK(LinearForm::parse("2:1") == LinearForm{{{2.0, 1.0, 0.0}}});
  CHECK_THROWS_AS(LinearForm::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(LinearForm::parse("1;2"), std::invalid_argument);
  CHECK_THROWS_AS(f.validate(TimeGrid(2.0, 4)), std::invalid_argument);
  CHECK_NOTHROW(f.validate(TimeGrid(3.0, 6)));
  CHECK(f.times() == std::vector<double>{0.0, 1.0, 2.0, 3.0});
}

TEST_CASE("panel: ten forms with at most three terms on {0, .5, 1, 2, 3} units") {
  const auto panel = standard_form_panel(2.0);
  CHECK(panel.size() == 10);
  for (const auto& f : panel) {
    CHECK(f.terms.size() >= 1);
    CHECK(f.terms.size() <= 3);
    CHECK_NOTHROW(f.validate(TimeGrid(6.0, 12)));
  }
}

TEST_CASE("indicator integrands are closed-form interval lengths") {
  // Path 0: A_1 = 1.3, A_2 = 2.1; path 1: A_1 = 1, A_2 = -1 (crosses zero).
  const TimeGrid grid(2.0, 2);
  const auto ens = explicit_paths(grid, {{0.0, 1.3, 2.1}, {0.0, 1.0, -1.0}});
  const SpatialGrid x(5.0, 10);
  const double alpha = 1.4, t1 = 0.7, t2 = -0.4;
  const LinearForm form{{{t1, 1.0, 0.0}, {t2, 2.0, 0.0}}};
  const auto pow_a = [alpha](double v) { return std::pow(std::abs(v), alpha); };
  for (auto kernel : {Kernel::indicator(), Kernel::signed_indicator()}) {
    const auto per_path = exponent_integrands(form, kernel, ens, x, StableSpec(alpha));
    REQUIRE(per_path.size() == 2);
    CHECK(per_path[0] == doctest::Approx(pow_a(t1 + t2) * 1.3 + pow_a(t2) * 0.8));
    CHECK(per_path[1] == doctest::Approx(pow_a(t1) + pow_a(t2)));
    const auto est = exponent_integral(form, kernel, ens, x, StableSpec(alpha));
    CHECK(est.exponent == doctest::Approx(0.5 * (per_path[0] + per_path[1])));
    CHECK(est.value == doctest::Approx(std::exp(-est.exponent)));
    CHECK(est.std_error == doctest::Approx(std::abs(per_path[0] - per_path[1]) / 2));
    CHECK(est.truncated_mass == 0.0);
  }
}

TEST_CASE("truncation is reported") {
  const TimeGrid grid(1.0, 1);
  const auto ens = explicit_paths(grid, {{0.0, 3.0}});
  const auto est = exponent_integral(LinearForm{{{1.0, 1.0, 0.0}}}, Kernel::indicator(), ens, SpatialGrid(2.0, 4),
                                     StableSpec(1.5));
  CHECK(est.truncated_mass == doctest::Approx(1.0));
  CHECK(est.exponent == doctest::Approx(2.0));
}

TEST_CASE("Levy kernel: exponent sums |theta|^alpha over disjoint time pieces") {
  const TimeGrid grid(3.0, 6);
  const auto ens = explicit_paths(grid, {std::vector<double>(7, 0.0)});
  const SpatialGrid x(3.0, 6);
  const double alpha = 1.7;
  // 1.0 Y(1) + 0.5 (Y(3) - Y(2)): pieces [0,1] and [2,3].
  const auto est = exponent_integral(LinearForm{{{1.0, 1.0, 0.0}, {0.5, 3.0, 2.0}}}, Kernel::levy(), ens, x,
                                     StableSpec(alpha));
  CHECK(est.exponent == doctest::Approx(1.0 + std::pow(0.5, alpha)));
  CHECK(est.std_error == 0.0);
  // -Y(1) + Y(2) + Y(3): [0,1] weight 1, [1,2] weight 2, [2,3] weight 1.
  const auto est2 = exponent_integral(LinearForm{{{-1.0, 1.0, 0.0}, {1.0, 2.0, 0.0}, {1.0, 3.0, 0.0}}},
                                      Kernel::levy(), ens, x, StableSpec(alpha));
  CHECK(est2.exponent == doctest::Approx(2.0 + std::pow(2.0, alpha)));
}

TEST_CASE("indicator and signed kernels give identical per-path integrands") {
  const TimeGrid grid(3.0, 300);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 200, SeededRng(51));
  const SpatialGrid x(8.0, 400);
  for (const auto& form : standard_form_panel(1.0)) {
    const auto a = exponent_integrands(form, Kernel::indicator(), ens, x, StableSpec(1.3));
    const auto b = exponent_integrands(form, Kernel::signed_indicator(), ens, x, StableSpec(1.3));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
}

TEST_CASE("local-time kernel at alpha = 1: exponent of theta Y(t) is |theta| times occupation time") {
  const TimeGrid grid(2.0, 400);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 100, SeededRng(52));
  const SpatialGrid x(6.0, 300);
  const auto lt = compute_local_time(ens, x, {200, 400});
  const auto per_path =
      exponent_integrands(LinearForm{{{-1.5, 2.0, 0.0}}}, Kernel::local_time_of(lt), ens, x, StableSpec(1.0));
  for (std::size_t i = 0; i < ens.n_paths; ++i)
    CHECK(per_path[i] == doctest::Approx(1.5 * (2.0 - lt.truncated_mass(i, 1))));
}

TEST_CASE("empirical characteristic function") {
  std::vector<ProcessSample> few(50, ProcessSample{0, KernelKind::Indicator, {1.0}, {0.0}});
  const LinearForm form{{{1.0, 1.0, 0.0}}};
  CHECK_THROWS_AS(empirical_char(few, form), std::invalid_argument);
  std::vector<ProcessSample> zeros(200, ProcessSample{0, KernelKind::Indicator, {1.0}, {0.0}});
  const auto c = empirical_char(zeros, form);
  CHECK(c.re == 1.0);
  CHECK(c.im == 0.0);
  CHECK(c.se_re == 0.0);
  CHECK(c.n == 200);
  std::vector<ProcessSample> pm;
  for (int r = 0; r < 200; ++r) pm.push_back({0, KernelKind::Indicator, {1.0}, {r % 2 ? 1.0 : -1.0}});
  const auto d = empirical_char(pm, LinearForm{{{std::numbers::pi / 2, 1.0, 0.0}}});
  CHECK(d.re == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.im == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d.se_im == doctest::Approx(1.0 / std::sqrt(200.0) * std::sqrt(200.0 / 199.0)));
}

TEST_CASE("single-term form: exponent is |theta|^alpha E'|A_t|") {
  const TimeGrid grid(2.0, 200);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 500, SeededRng(53));
  const SpatialGrid x(4.0, 200);
  double mean_abs = 0.0;
  for (std::size_t i = 0; i < ens.n_paths; ++i) mean_abs += std::abs(x.clip(ens.at(i, 150))) / ens.n_paths;
  const auto est = exponent_integral(LinearForm{{{-1.3, 1.5, 0.0}}}, Kernel::indicator(), ens, x, StableSpec(1.2));
  CHECK(est.exponent == doctest::Approx(std::pow(1.3, 1.2) * mean_abs));
}

TEST_CASE("theta = 0 gives exponent 0 and characteristic value 1") {
  const TimeGrid grid(2.0, 20);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 50, SeededRng(54));
  const SpatialGrid x(6.0, 60);
  const LinearForm zero{{{0.0, 1.0, 0.0}, {0.0, 2.0, 1.0}}};
  const auto est = exponent_integral(zero, Kernel::indicator(), ens, x, StableSpec(1.5));
  CHECK(est.exponent == 0.0);
  CHECK(est.value == 1.0);
  const auto samples = simulate_process(Kernel::indicator(), ens, x, {1.0, 2.0}, StableSpec(1.5), SeededRng(55), 200);
  const auto c = empirical_char(samples, zero);
  CHECK(c.re == 1.0);
  CHECK(c.im == 0.0);
}

TEST_CASE("oracle agrees with a fine-grid brute force") {
  // theta = (1, -1), t = (1, 2), s = (0, 0), FBM H' = 0.5, alpha = 1.5. The
  // brute force evaluates the kernel at cell midpoints of a 10x finer grid
  // on 10x the paths.
  const double alpha = 1.5;
  const TimeGrid grid(2.0, 200);
  const LinearForm form{{{1.0, 1.0, 0.0}, {-1.0, 2.0, 0.0}}};
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 1000, SeededRng(56));
  const auto big = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 10000, SeededRng(57));
  const SpatialGrid x(6.0, 500), fine(6.0, 5000);
  const auto est = exponent_integral(form, Kernel::indicator(), ens, x, StableSpec(alpha));
  std::vector<double> brute(big.n_paths);
  for (std::size_t i = 0; i < big.n_paths; ++i) {
    const double a1 = big.at(i, 100), a2 = big.at(i, 200);
    auto inside = [](double y, double a) { return (a >= 0 ? (y >= 0 && y <= a) : (y <= 0 && y >= a)) ? 1.0 : 0.0; };
    double acc = 0.0;
    for (std::size_t j = 0; j < fine.n_cells(); ++j) {
      const double y = fine.midpoint(j);
      acc += std::pow(std::abs(inside(y, a1) - inside(y, a2)), alpha);
    }
    brute[i] = acc * fine.dx();
  }
  const double se = std::hypot(est.std_error, stats::std_error(brute));
  CHECK(std::abs(est.exponent - stats::mean(brute)) < 2 * se);
}

TEST_CASE("symmetric process: imaginary parts vanish within 3 standard errors") {
  const TimeGrid grid(3.0, 300);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(0.5), grid, 300, SeededRng(58));
  const SpatialGrid x(8.0, 400);
  const auto samples = simulate_process(Kernel::indicator(), ens, x, {0.5, 1.0, 2.0, 3.0}, StableSpec(1.5),
                                        SeededRng(59), 10000);
  for (const auto& form : standard_form_panel(1.0)) CHECK(std::abs(empirical_char(samples, form).im) < 3 * empirical_char(samples, form).se_im);
}

TEST_CASE("exponent scaling in theta and under rescaled ensembles") {
  const double alpha = 1.4, h = 0.7, c = 2.0;
  const TimeGrid grid(3.0, 30), grid_c(6.0, 30);
  const auto ens = sample_fbm_ensemble(SubordinatorSpec::fbm(h), grid, 300, SeededRng(60));
  // The same paths read as A_{ct} = c^H' A_t on the stretched time grid.
  auto scaled = ens;
  scaled.grid = grid_c;
  for (auto& v : scaled.values) v *= std::pow(c, h);
  const SpatialGrid x(50.0, 100);
  for (const auto& form : standard_form_panel(1.0)) {
    LinearForm stretched = form, doubled = form;
    for (auto& t : stretched.terms) {
      t.t *= c;
      t.s *= c;
    }
    for (auto& t : doubled.terms) t.theta *= 2.0;
    const double base = exponent_integral(form, Kernel::indicator(), ens, x, StableSpec(alpha)).exponent;
    CHECK(exponent_integral(stretched, Kernel::indicator(), scaled, x, StableSpec(alpha)).exponent ==
          doctest::Approx(std::pow(c, h) * base));
    CHECK(exponent_integral(doubled, Kernel::indicator(), ens, x, StableSpec(alpha)).exponent ==
          doctest::Approx(std::pow(2.0, alpha) * base));
  }
}

}
