#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ifsm::stats {

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
/// Standard error of the mean.
double std_error(std::span<const double> x);

/// Linear-interpolated p-quantile (type 7); takes a copy.
double quantile(std::vector<double> x, double p);
inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value c(level) sqrt((n + m) / (n m));
/// c = 1.628 at the 1% level.
double ks_critical_value(double level, std::size_t n, std::size_t m);

struct LjungBox {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Ljung-Box portmanteau test of no autocorrelation up to `lags`.
LjungBox ljung_box(std::span<const double> x, std::size_t lags);

/// Standard normal upper tail 1 - Phi(z).
double normal_upper_tail(double z);

}  // namespace ifsm::stats
