#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "ifsm/stats.hpp"

namespace testing {

inline std::filesystem::path scratch(const std::string& name) {
  const char* env = std::getenv("IFSM_TEST_TMP");
  auto dir = std::filesystem::path(env ? env : std::filesystem::temp_directory_path().string()) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Empirical characteristic function of a sample at theta, with the standard
// errors of its real and imaginary parts.
struct CharPoint {
  double re, im, se_re, se_im;
};

inline CharPoint char_at(const std::vector<double>& x, double theta) {
  std::vector<double> c(x.size()), s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    c[i] = std::cos(theta * x[i]);
    s[i] = std::sin(theta * x[i]);
  }
  return {ifsm::stats::mean(c), ifsm::stats::mean(s), ifsm::stats::std_error(c), ifsm::stats::std_error(s)};
}

// |empirical - exact| in units of the combined standard error.
inline double char_z(const CharPoint& p, double exact) {
  return std::hypot(p.re - exact, p.im) / std::hypot(p.se_re, p.se_im);
}

}  // namespace testing
