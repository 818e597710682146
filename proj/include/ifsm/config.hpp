#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifsm/integral.hpp"
#include "ifsm/subordinator.hpp"

namespace ifsm {

enum class Experiment { selfsim, stationarity, signkernel, charmatch, mixing, conservativity, extreme, feasibility };

std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(const std::string& name);
std::vector<Experiment> all_experiments();

/// Pass/fail thresholds; defaults are the acceptance values.
struct Tolerances {
  double selfsim_abs = 0.05;
  double selfsim_r2 = 0.99;
  double charmatch_se = 3.0;
  double signkernel_se = 3.0;
  double ks_level = 0.01;
  double mixing_ratio = 0.1;
  double conservativity_min = 10.0;
  /// Conservativity growth exponent must lie within this band around 1 - H'.
  double growth_band = 0.1;
  double extreme_ratio = 0.5;
  double runtime_budget_s = 600.0;

  bool operator==(const Tolerances&) const = default;
};

/// The mixing experiment runs on its own unit-step subordinator ensemble.
struct MixingSettings {
  std::size_t n_max = 200;
  std::size_t n_paths = 10000;
  bool operator==(const MixingSettings&) const = default;
};

struct ConservativitySettings {
  std::size_t n_sum = 10000;
  std::size_t n_paths = 1000;
  std::vector<double> probes{0.0, 0.5, -0.5};
  bool operator==(const ConservativitySettings&) const = default;
};

struct ExtremeSettings {
  std::size_t n_max = 1000;
  std::size_t n_paths = 200;
  std::size_t n_replicates = 2000;
  std::size_t n_small = 10;
  bool operator==(const ExtremeSettings&) const = default;
};

struct RunConfig {
  ProcessKind process = ProcessKind::IFSM;
  double alpha = 1.5;
  SubordinatorSpec subordinator = SubordinatorSpec{SubordinatorKind::FBM, 0.5, 2.0, 1.0};
  double t_max = 10.0;
  std::size_t n_steps = 1000;
  std::optional<double> half_width;  // nullopt: fitted from a pilot ensemble
  std::size_t cells_per_side = 500;
  std::size_t n_paths = 1000;
  std::size_t n_replicates = 10000;
  std::uint64_t seed = 1;
  double quantile_p = 0.5;
  std::vector<Experiment> experiments = all_experiments();
  Tolerances tolerances;
  MixingSettings mixing;
  ConservativitySettings conservativity;
  ExtremeSettings extreme;

  bool operator==(const RunConfig&) const = default;
};

struct ParseResult {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;
  std::vector<std::string> notices;
  bool ok() const noexcept { return config.has_value(); }
};

/// Parses a YAML run config: flat sections of typed scalars and lists.
/// Reports every violation, not just the first. In strict mode unknown keys
/// are errors, otherwise notices. A subordinator Hurst exponent of exactly 1
/// is accepted as the degenerate Levy case and switches the process to Levy.
ParseResult parse_config(const std::string& text, bool strict = true);

/// Validates an in-memory config against every module precondition.
std::vector<std::string> validate_config(const RunConfig& config);

/// Serializes to the same YAML grammar; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

}  // namespace ifsm
