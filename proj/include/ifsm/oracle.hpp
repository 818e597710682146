#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ifsm/integral.hpp"

namespace ifsm {

/// sum_j theta_j (Y(t_j) - Y(s_j)).
struct FormTerm {
  double theta = 0.0;
  double t = 0.0;
  double s = 0.0;

  bool operator==(const FormTerm&) const = default;
};

struct LinearForm {
  std::vector<FormTerm> terms;

  /// "theta:t:s,theta:t:s,..."
  std::string to_string() const;
  static LinearForm parse(const std::string& text);
  /// Throws if the form is empty or any time is off the grid.
  void validate(const TimeGrid& grid) const;
  /// Every distinct time referenced (t_j and s_j), ascending.
  std::vector<double> times() const;

  bool operator==(const LinearForm&) const = default;
};

/// -log E exp(i <form, Y>) = integral of E'|sum_j theta_j g_j(x)|^alpha dx.
struct CharFunctionalEstimate {
  double exponent = 0.0;
  double value = 1.0;
  double std_error = 0.0;       // Monte Carlo error of the exponent over paths
  double truncated_mass = 0.0;  // largest E'[(|A_t| - X)_+] over the form's times
};

/// Evaluates the characteristic-functional exponent directly over the
/// ensemble's paths. For the indicator and Levy kernels the increment kernels
/// are step functions of x, so each path's x-integral is an exact sum of
/// interval lengths; LocalTime sums over x-cells. Uses no stable noise.
CharFunctionalEstimate exponent_integral(const LinearForm& form, const Kernel& kernel,
                                         const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                                         StableSpec spec, double truncation_tolerance = 1e-4);

/// Per-path x-integrals whose mean is the exponent (exposed for testing).
std::vector<double> exponent_integrands(const LinearForm& form, const Kernel& kernel,
                                        const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                                        StableSpec spec);

struct ComplexEstimate {
  double re = 0.0;
  double im = 0.0;
  double se_re = 0.0;
  double se_im = 0.0;
  std::size_t n = 0;
};

inline constexpr std::size_t kMinCharReplicates = 100;

/// Sample mean of exp(i <form, Y>) over i.i.d. replicates with componentwise standard errors.
ComplexEstimate empirical_char(const std::vector<ProcessSample>& samples, const LinearForm& form);

/// The fixed panel of ten forms (k <= 3) used by the cross-checks; times are
/// multiples of `unit` drawn from {0, 0.5, 1, 2, 3}.
std::vector<LinearForm> standard_form_panel(double unit = 1.0);

}  // namespace ifsm
