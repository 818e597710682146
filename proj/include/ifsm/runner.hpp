#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifsm/config.hpp"
#include "ifsm/integral.hpp"

namespace ifsm {

namespace cache {
class EnsembleCache;
}

inline constexpr int kReportSchemaVersion = 1;

/// A CSV table whose cells are already formatted; numbers use %.17g so the
/// emitted text round-trips exactly.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write_csv(const std::filesystem::path& file) const;
  static Table read_csv(const std::filesystem::path& file);
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

std::string format_number(double v);

struct ExperimentResult {
  Experiment experiment{};
  bool applicable = true;
  bool pass = true;
  std::string note;
  nlohmann::json metrics;
  std::map<std::string, Table> tables;  // file stem -> table
};

struct RunReport {
  RunConfig config;
  std::vector<ExperimentResult> results;
  nlohmann::json truncation;  // kernel mass lost to the x-axis truncation, per ensemble
  bool all_pass = true;

  // Run metadata; kept out of the deterministic report.
  double wall_time_s = 0.0;
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
  int threads = 1;

  /// Deterministic report document (no timing or cache state).
  nlohmann::json to_json() const;
  nlohmann::json run_log() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::filesystem::path> cache_dir;  // defaults to <out_dir>/cache
  int threads = 0;                                 // 0: OpenMP default
};

/// Runs the configured experiments in dependency order. With an output
/// directory, writes report.json, run_log.json and one CSV per table.
RunReport run(const RunConfig& config, const RunOptions& options = {});

/// Re-derives each experiment's verdict from the CSVs in `out_dir` and the
/// configured tolerances.
std::map<Experiment, bool> derive_verdicts(const std::filesystem::path& out_dir, const RunConfig& config);

/// Verdict of one experiment from its tables; the runner and derive_verdicts share it.
bool verdict(Experiment experiment, const std::map<std::string, Table>& tables, const RunConfig& config);

/// Time grid, fitted x-grid and main subordinator ensemble of a run. The
/// degenerate Levy process gets a single all-zero path and X = t_max.
struct Workspace {
  TimeGrid time_grid;
  SpatialGrid grid;
  SubordinatorEnsemble ensemble;
};

Workspace prepare_workspace(const RunConfig& config, cache::EnsembleCache* cache = nullptr);

/// Kernel of the configured process; LocalTime kernels still need a field attached.
Kernel process_kernel(ProcessKind process);

/// Simulates the configured process at `times` on the workspace ensemble,
/// computing local times first when the kernel needs them.
std::vector<ProcessSample> simulate_configured(const RunConfig& config, const Workspace& ws,
                                               const std::vector<double>& times, std::size_t n_replicates,
                                               const SeededRng& rng);

/// Half-width covering the 99.9% quantile of max_t |A_t| over a pilot ensemble.
double fit_half_width(const SubordinatorEnsemble& pilot);

}  // namespace ifsm
