#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ifsm/stable.hpp"
#include "unit/helpers.hpp"

using namespace ifsm;

TEST_SUITE("stable") {

TEST_CASE("spec rejects alpha outside (0, 2]") {
  CHECK_THROWS_AS(StableSpec(0.0), std::invalid_argument);
  CHECK_THROWS_AS(StableSpec(2.1), std::invalid_argument);
  CHECK_THROWS_AS(StableSpec(NAN), std::invalid_argument);
  CHECK(StableSpec(2.0).alpha() == 2.0);
}

TEST_CASE("alpha = 2 is N(0, 2 sigma^2)") {
  SeededRng rng(11);
  const double sigma = 1.7;
  std::vector<double> x(1000000);
  for (auto& v : x) v = sample_sas(StableSpec(2.0), sigma, rng);
  const double var = stats::variance(x);
  // Var of the sample variance of a normal is 2 var^2 / (n - 1).
  const double se = 2 * sigma * sigma * std::sqrt(2.0 / (x.size() - 1));
  CHECK(std::abs(var - 2 * sigma * sigma) < 4 * se);
  CHECK(std::abs(var / (2 * sigma * sigma) - 1.0) < 0.01);
  CHECK(std::abs(stats::mean(x)) < 4 * stats::std_error(x));
}

TEST_CASE("alpha = 1 is standard Cauchy: median |X| = 1") {
  SeededRng rng(12);
  std::vector<double> a(1000000);
  for (auto& v : a) v = std::abs(sample_sas(StableSpec(1.0), 1.0, rng));
  CHECK(std::abs(stats::median(a) - 1.0) < 0.01);
  // Density of the sample median near 1 is f(1) = 1/pi, so se = 1 / (2 f sqrt(n)).
  CHECK(std::abs(stats::median(a) - 1.0) < 4 * std::numbers::pi / (2 * std::sqrt(a.size())));
}

TEST_CASE("characteristic function exp(-sigma^alpha |theta|^alpha)") {
  for (double alpha : {0.7, 1.2, 1.5, 1.9}) {
    SeededRng rng(13, static_cast<std::uint64_t>(alpha * 100));
    const double sigma = 0.8;
    std::vector<double> x(100000);
    for (auto& v : x) v = sample_sas(StableSpec(alpha), sigma, rng);
    for (double theta : {0.5, 1.0, 2.0}) {
      const double exact = std::exp(-std::pow(sigma * theta, alpha));
      CAPTURE(alpha);
      CAPTURE(theta);
      CHECK(testing::char_z(testing::char_at(x, theta), exact) < 4.0);
    }
  }
}

TEST_CASE("alpha within 1e-6 of 1 uses the Cauchy branch") {
  SeededRng a(5), b(5);
  const StableSampler near(StableSpec(1.0 + 1e-7)), exact(StableSpec(1.0));
  for (int i = 0; i < 100; ++i) CHECK(near(a) == exact(b));
}

TEST_CASE("every branch consumes exactly two uniforms") {
  for (double alpha : {0.5, 1.0, 1.5, 2.0}) {
    SeededRng a(9), b(9);
    StableSampler(StableSpec(alpha))(a);
    b();
    b();
    CHECK(a() == b());
  }
}

TEST_CASE("sample_sas rejects negative or non-finite scales; zero scale gives zero") {
  SeededRng rng(1);
  CHECK_THROWS_AS(sample_sas(StableSpec(1.5), -1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_sas(StableSpec(1.5), INFINITY, rng), std::invalid_argument);
  CHECK(sample_sas(StableSpec(1.5), 0.0, rng) == 0.0);
}

TEST_CASE("cell scale is mass^(1/alpha)") {
  CHECK(cell_scale(0.25, StableSpec(2.0)) == doctest::Approx(0.5));
  CHECK(cell_scale(8.0, StableSpec(1.5)) == doctest::Approx(4.0));
  for (double alpha : {0.5, 1.0, 1.7}) {
    CHECK(cell_scale(1.0, StableSpec(alpha)) == 1.0);
    CHECK(cell_scale(0.0, StableSpec(alpha)) == 0.0);
  }
}

TEST_CASE("noise field: sub-ranges regenerate bit-identically") {
  const SpatialGrid grid(3.0, 50);
  const StableSpec spec(1.3);
  const SeededRng rng(21, 4);
  const auto field = sample_noise_field(grid, 7, spec, rng);
  REQUIRE(field.values.size() == 7 * grid.n_cells());
  const StableSampler sampler(spec);
  for (std::size_t first : {0, 5, 31, 32, 77}) {
    std::vector<double> out(20);
    fill_noise_cells(sampler, field.scale_per_cell(), rng, 3, first, out);
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == field.at(3, first + k));
  }
  CHECK(sample_noise_field(grid, 7, spec, rng).values == field.values);
}

TEST_CASE("noise field: sums over cells scale additively in alpha-mass") {
  // The sum of k cells is S_alpha((k dx / n_paths)^(1/alpha)).
  const StableSpec spec(1.5);
  const SpatialGrid grid(1.0, 10);  // dx = 0.1
  const std::size_t n_paths = 4, k = 8;
  std::vector<double> sums;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    const auto f = sample_noise_field(grid, n_paths, spec, SeededRng(3, r));
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += f.at(1, j);
    sums.push_back(s);
  }
  const double sigma = std::pow(k * 0.1 / n_paths, 1.0 / 1.5);
  for (double theta : {1.0, 3.0})
    CHECK(testing::char_z(testing::char_at(sums, theta), std::exp(-std::pow(sigma * theta, 1.5))) < 4.0);
}

TEST_CASE("noise field refuses to exceed its memory budget") {
  const SpatialGrid grid(1.0, 500);
  CHECK_THROWS_AS(sample_noise_field(grid, 1000, StableSpec(1.5), SeededRng(1), 1000), std::length_error);
}

TEST_CASE("noise field: signs of disjoint cells are uncorrelated") {
  const SpatialGrid grid(1.0, 2);
  const std::size_t n = 100000;
  std::vector<double> a(n), b(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto f = sample_noise_field(grid, 1, StableSpec(1.3), SeededRng(14, r));
    a[r] = f.at(0, 0) > 0 ? 1.0 : -1.0;
    b[r] = f.at(0, 3) > 0 ? 1.0 : -1.0;
  }
  double ab = 0.0;
  for (std::size_t r = 0; r < n; ++r) ab += a[r] * b[r];
  const double corr = (ab / n - stats::mean(a) * stats::mean(b)) /
                      std::sqrt(stats::variance(a) * stats::variance(b));
  CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("noise field: cell scales add up to the control mass of the grid") {
  const SpatialGrid grid(1.7, 85);
  const auto f = sample_noise_field(grid, 1, StableSpec(1.4), SeededRng(15));
  const double total = std::pow(grid.n_cells() * std::pow(f.scale_per_cell(), 1.4), 1 / 1.4);
  CHECK(total == doctest::Approx(std::pow(2 * 1.7, 1 / 1.4)));
}

TEST_CASE("noise field, alpha = 2: the sum over all cells and paths has variance 2 (2X)") {
  const SpatialGrid grid(1.0, 100);  // dx = 0.01
  const std::size_t reps = 40000;
  std::vector<double> sums(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto f = sample_noise_field(grid, 100, StableSpec(2.0), SeededRng(16, r));
    double s = 0.0;
    for (double v : f.values) s += v;
    sums[r] = s;
  }
  CHECK(std::abs(stats::variance(sums) / 4.0 - 1.0) < 0.02);
}

}
