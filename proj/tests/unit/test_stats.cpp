#include <doctest.h>

#include <cmath>

#include "ifsm/rng.hpp"
#include "ifsm/stats.hpp"

using namespace ifsm;

TEST_SUITE("stats") {

TEST_CASE("moments and quantiles") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  CHECK(stats::mean(x) == 3.0);
  CHECK(stats::variance(x) == 2.5);
  CHECK(stats::std_error(x) == doctest::Approx(std::sqrt(0.5)));
  CHECK(stats::median(x) == 3.0);
  CHECK(stats::quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(stats::quantile({10, 0, 5}, 0.0) == 0.0);
  CHECK(stats::quantile({10, 0, 5}, 1.0) == 10.0);
  CHECK(stats::quantile({1, 2, 3, 4, 5}, 0.9) == doctest::Approx(4.6));
}

TEST_CASE("line fit recovers an exact line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = stats::fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.slope_std_error == doctest::Approx(0.0));
}

TEST_CASE("KS distance and critical value") {
  CHECK(stats::ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(stats::ks_distance({1, 2}, {3, 4}) == 1.0);
  CHECK(stats::ks_distance({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));
  // c(0.01) = sqrt(-ln(0.005) / 2) = 1.6276
  CHECK(stats::ks_critical_value(0.01, 10000, 10000) == doctest::Approx(1.6276 * std::sqrt(2.0 / 10000)).epsilon(1e-4));
}

TEST_CASE("normal tail") {
  CHECK(stats::normal_upper_tail(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_upper_tail(1.959963985) == doctest::Approx(0.025));
}

TEST_CASE("Ljung-Box: white noise passes, AR(1) fails") {
  SeededRng rng(4);
  std::vector<double> w(4000), ar(4000);
  double prev = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = standard_normal(rng);
    prev = 0.5 * prev + w[i];
    ar[i] = prev;
  }
  CHECK(stats::ljung_box(w, 20).p_value > 0.001);
  CHECK(stats::ljung_box(ar, 20).p_value < 1e-6);
}

}
