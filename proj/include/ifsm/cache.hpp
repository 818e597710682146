#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ifsm/stable.hpp"
#include "ifsm/subordinator.hpp"

namespace ifsm::cache {

/// Binary envelope: "IFSMBIN1", u32 header length, JSON header, u64 rows,
/// u64 cols, then rows * cols little-endian float64 values in row-major order.
struct Envelope {
  nlohmann::json header;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::vector<double> data;
};

void write_envelope(const std::filesystem::path& file, const Envelope& envelope);
Envelope read_envelope(const std::filesystem::path& file);

nlohmann::json ensemble_header(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed);
nlohmann::json field_header(const StableNoiseField& field);

void save_ensemble(const std::filesystem::path& file, const SubordinatorEnsemble& ensemble);
SubordinatorEnsemble load_ensemble(const std::filesystem::path& file);

void save_field(const std::filesystem::path& file, const StableNoiseField& field);
StableNoiseField load_field(const std::filesystem::path& file);

/// Stable 64-bit FNV-1a digest, hex encoded.
std::string digest(const std::string& text);

/// Directory of cached ensembles keyed by (spec, grid, n_paths, seed).
class EnsembleCache {
 public:
  explicit EnsembleCache(std::filesystem::path dir);

  /// Loads the cached ensemble when present, otherwise samples and stores it.
  SubordinatorEnsemble get(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                           const SeededRng& rng);

  std::size_t hits() const noexcept { return hits_; }
  std::size_t misses() const noexcept { return misses_; }
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace ifsm::cache
