#include "ifsm/cache.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ifsm::cache {

namespace {

constexpr std::array<char, 8> kMagic = {'I', 'F', 'S', 'M', 'B', 'I', 'N', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated cache file");
  return v;
}

}  // namespace

void write_envelope(const std::filesystem::path& file, const Envelope& envelope) {
  if (envelope.data.size() != envelope.rows * envelope.cols)
    throw std::invalid_argument("envelope payload does not match rows x cols");
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  const auto tmp = std::filesystem::path(file.string() + ".tmp");
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    const std::string header = envelope.header.dump();
    os.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(os, static_cast<std::uint32_t>(header.size()));
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    put<std::uint64_t>(os, envelope.rows);
    put<std::uint64_t>(os, envelope.cols);
    os.write(reinterpret_cast<const char*>(envelope.data.data()),
             static_cast<std::streamsize>(envelope.data.size() * sizeof(double)));
    if (!os) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

Envelope read_envelope(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw std::runtime_error(file.string() + " is not an IFSMBIN1 file");
  const auto header_len = get<std::uint32_t>(is);
  std::string header(header_len, '\0');
  if (!is.read(header.data(), header_len)) throw std::runtime_error("truncated cache header");
  Envelope env;
  env.header = nlohmann::json::parse(header);
  env.rows = get<std::uint64_t>(is);
  env.cols = get<std::uint64_t>(is);
  env.data.resize(env.rows * env.cols);
  if (!is.read(reinterpret_cast<char*>(env.data.data()), static_cast<std::streamsize>(env.data.size() * sizeof(double))))
    throw std::runtime_error("truncated cache payload");
  return env;
}

nlohmann::json ensemble_header(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t seed) {
  return {{"type", "ensemble"},     {"kind", to_string(spec.kind)}, {"hurst", spec.hurst},
          {"beta", spec.beta},      {"sigma", spec.sigma},          {"t_max", grid.t_max()},
          {"n_steps", grid.n_steps()}, {"n_paths", n_paths},        {"seed", seed}};
}

nlohmann::json field_header(const StableNoiseField& field) {
  return {{"type", "noise_field"},
          {"alpha", field.spec.alpha()},
          {"seed", field.seed},
          {"stream", field.stream},
          {"half_width", field.grid.half_width()},
          {"cells_per_side", field.grid.cells_per_side()},
          {"n_paths", field.n_paths}};
}

void save_ensemble(const std::filesystem::path& file, const SubordinatorEnsemble& ensemble) {
  Envelope env;
  env.header = ensemble_header(ensemble.spec, ensemble.grid, ensemble.n_paths, ensemble.seed);
  env.header["method"] = to_string(ensemble.method);
  env.rows = ensemble.n_paths;
  env.cols = ensemble.n_points();
  env.data = ensemble.values;
  write_envelope(file, env);
}

SubordinatorEnsemble load_ensemble(const std::filesystem::path& file) {
  auto env = read_envelope(file);
  const auto& h = env.header;
  if (h.at("type") != "ensemble") throw std::runtime_error(file.string() + " does not hold an ensemble");
  SubordinatorSpec spec{subordinator_kind_from_string(h.at("kind")), h.at("hurst"), h.at("beta"), h.at("sigma")};
  TimeGrid grid(h.at("t_max"), h.at("n_steps"));
  const std::string method = h.value("method", "external");
  PathSynthesis m = PathSynthesis::External;
  for (auto c : {PathSynthesis::CirculantEmbedding, PathSynthesis::Cholesky, PathSynthesis::IndependentIncrements})
    if (to_string(c) == method) m = c;
  if (env.rows != h.at("n_paths").get<std::uint64_t>() || env.cols != grid.n_points())
    throw std::runtime_error("ensemble payload shape does not match its header");
  return SubordinatorEnsemble{spec, grid, env.rows, h.at("seed"), m, std::move(env.data)};
}

void save_field(const std::filesystem::path& file, const StableNoiseField& field) {
  write_envelope(file, Envelope{field_header(field), field.n_paths, field.grid.n_cells(), field.values});
}

StableNoiseField load_field(const std::filesystem::path& file) {
  auto env = read_envelope(file);
  const auto& h = env.header;
  if (h.at("type") != "noise_field") throw std::runtime_error(file.string() + " does not hold a noise field");
  SpatialGrid grid(h.at("half_width"), h.at("cells_per_side"));
  if (env.rows != h.at("n_paths").get<std::uint64_t>() || env.cols != grid.n_cells())
    throw std::runtime_error("noise field payload shape does not match its header");
  return StableNoiseField{StableSpec(h.at("alpha")), h.at("seed"), h.at("stream"), grid, env.rows,
                          std::move(env.data)};
}

std::string digest(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EnsembleCache::EnsembleCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

SubordinatorEnsemble EnsembleCache::get(const SubordinatorSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                                        const SeededRng& rng) {
  auto header = ensemble_header(spec, grid, n_paths, rng.seed());
  header["stream"] = rng.stream();
  const auto file = dir_ / ("ensemble_" + digest(header.dump()) + ".bin");
  if (std::filesystem::exists(file)) {
    try {
      auto ens = load_ensemble(file);
      ++hits_;
      spdlog::info("cache hit: {} ({} paths x {} points)", file.filename().string(), ens.n_paths, ens.n_points());
      return ens;
    } catch (const std::exception& e) {
      spdlog::warn("discarding unreadable cache entry {}: {}", file.string(), e.what());
    }
  }
  ++misses_;
  auto ens = sample_ensemble(spec, grid, n_paths, rng);
  save_ensemble(file, ens);
  spdlog::info("cache miss: generated {} via {}", file.filename().string(), to_string(ens.method));
  return ens;
}

}  // namespace ifsm::cache
