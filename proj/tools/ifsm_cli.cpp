// ifsm: simulate, check and report on indicator / local-time fractional stable motions.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ifsm/cache.hpp"
#include "ifsm/diagnostics.hpp"
#include "ifsm/oracle.hpp"
#include "ifsm/runner.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
  bool strict = false;
};

// Stream tags for CLI-only draws, disjoint from the runner's.
constexpr std::uint64_t kSimulateStream = 30;

ifsm::RunConfig load_config(const Common& c) {
  std::string text;
  if (!c.config_path.empty()) {
    std::ifstream is(c.config_path);
    if (!is) throw std::runtime_error("cannot read config " + c.config_path);
    std::ostringstream ss;
    ss << is.rdbuf();
    text = ss.str();
  }
  auto parsed = ifsm::parse_config(text, c.strict);
  for (const auto& n : parsed.notices) spdlog::info("config: {}", n);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors) std::cerr << "config error: " << e << '\n';
    throw std::runtime_error("invalid config");
  }
  auto cfg = *parsed.config;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::optional<std::filesystem::path> out_dir(const Common& c) {
  if (c.out_dir.empty()) return std::nullopt;
  std::filesystem::create_directories(c.out_dir);
  return std::filesystem::path(c.out_dir);
}

ifsm::Workspace workspace(const ifsm::RunConfig& cfg, const Common& c,
                          std::optional<ifsm::cache::EnsembleCache>& cache) {
  if (auto dir = out_dir(c)) cache.emplace(*dir / "cache");
  return ifsm::prepare_workspace(cfg, cache ? &*cache : nullptr);
}

// Writes to <out>/<name> when --out is given, stdout otherwise.
void emit(const Common& c, const std::string& name, const std::string& text) {
  if (auto dir = out_dir(c)) {
    std::ofstream(*dir / name) << text;
    spdlog::info("wrote {}", (*dir / name).string());
  } else {
    std::cout << text;
  }
}

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

int cmd_simulate(const Common& c, const std::string& times_text, std::size_t replicates) {
  const auto cfg = load_config(c);
  if (c.threads > 0) omp_set_num_threads(c.threads);
  std::optional<ifsm::cache::EnsembleCache> cache;
  const auto ws = workspace(cfg, c, cache);
  const auto times = times_text.empty() ? ifsm::log_spaced_grid_times(ws.time_grid, 8) : parse_times(times_text);
  const std::size_t r = replicates ? replicates : cfg.n_replicates;
  const auto samples =
      ifsm::simulate_configured(cfg, ws, times, r, ifsm::SeededRng(cfg.seed).substream(kSimulateStream));
  const double h_prime = cfg.process == ifsm::ProcessKind::Levy ? 1.0 : cfg.subordinator.self_similarity();
  const auto kernel = ifsm::to_string(ifsm::process_kernel(cfg.process).kind);
  std::ostringstream os;
  os << "replicate_id,t,value,kernel,alpha,H_prime\n";
  for (const auto& s : samples)
    for (std::size_t k = 0; k < s.times.size(); ++k)
      os << s.replicate_id << ',' << ifsm::format_number(s.times[k]) << ',' << ifsm::format_number(s.values[k])
         << ',' << kernel << ',' << ifsm::format_number(cfg.alpha) << ',' << ifsm::format_number(h_prime) << '\n';
  emit(c, "simulate.csv", os.str());
  return 0;
}

int cmd_oracle(const Common& c, const std::string& form_text) {
  const auto cfg = load_config(c);
  if (c.threads > 0) omp_set_num_threads(c.threads);
  std::optional<ifsm::cache::EnsembleCache> cache;
  const auto ws = workspace(cfg, c, cache);
  const auto form = ifsm::LinearForm::parse(form_text);
  form.validate(ws.time_grid);
  auto kernel = ifsm::process_kernel(cfg.process);
  std::optional<ifsm::LocalTimeField> lt;
  if (kernel.kind == ifsm::KernelKind::LocalTime) {
    lt.emplace(ifsm::compute_local_time(ws.ensemble, ws.grid, ifsm::time_indices(ws.time_grid, form.times())));
    kernel.local_time = &*lt;
  }
  const auto est = ifsm::exponent_integral(form, kernel, ws.ensemble, ws.grid, ifsm::StableSpec(cfg.alpha));
  const nlohmann::json j = {
      {"form", form.to_string()}, {"exponent", est.exponent}, {"stderr", est.std_error}, {"value", est.value}};
  emit(c, "oracle.json", j.dump(2) + "\n");
  return 0;
}

int cmd_verify(const Common& c) {
  const auto cfg = load_config(c);
  ifsm::RunOptions opts;
  opts.out_dir = out_dir(c);
  opts.threads = c.threads;
  const auto report = ifsm::run(cfg, opts);
  for (const auto& r : report.results)
    std::cout << ifsm::to_string(r.experiment) << ": " << (!r.applicable ? "n/a" : (r.pass ? "PASS" : "FAIL"))
              << (r.note.empty() ? "" : "  (" + r.note + ")") << '\n';
  std::cout << "all_pass: " << (report.all_pass ? "true" : "false") << "  wall_time_s: " << report.wall_time_s
            << '\n';
  if (!opts.out_dir) std::cout << report.to_json().dump(2) << '\n';
  return report.all_pass ? 0 : 1;
}

int cmd_report(const Common& c) {
  if (c.out_dir.empty()) throw std::runtime_error("report needs --out <dir> of a previous verify run");
  const std::filesystem::path dir(c.out_dir);
  std::ifstream is(dir / "report.json");
  if (!is) throw std::runtime_error("no report.json in " + dir.string());
  const auto json = nlohmann::json::parse(is);
  // Tolerances come from --config when given, else from the report's config echo (JSON is valid YAML).
  ifsm::RunConfig cfg;
  if (!c.config_path.empty()) {
    cfg = load_config(c);
  } else {
    const auto echo = ifsm::parse_config(json.at("config").dump(), false);
    if (!echo.ok()) throw std::runtime_error("report.json carries an unreadable config echo");
    cfg = *echo.config;
  }
  const auto derived = ifsm::derive_verdicts(dir, cfg);
  bool consistent = true, all_pass = true;
  for (const auto& r : json.at("experiments")) {
    const auto e = ifsm::experiment_from_string(r.at("name").get<std::string>());
    if (!e || !r.at("applicable").get<bool>()) continue;
    const bool reported = r.at("pass").get<bool>();
    const auto it = derived.find(*e);
    const bool ok = it != derived.end() && it->second == reported;
    consistent = consistent && ok;
    all_pass = all_pass && reported;
    std::cout << ifsm::to_string(*e) << ": reported " << (reported ? "PASS" : "FAIL") << ", derived "
              << (it == derived.end() ? "missing" : (it->second ? "PASS" : "FAIL")) << (ok ? "" : "  MISMATCH")
              << '\n';
  }
  std::cout << "verdicts " << (consistent ? "consistent" : "INCONSISTENT") << " with CSVs\n";
  return consistent && all_pass ? 0 : 1;
}

int cmd_export_paths(const Common& c) {
  const auto cfg = load_config(c);
  if (c.threads > 0) omp_set_num_threads(c.threads);
  std::optional<ifsm::cache::EnsembleCache> cache;
  const auto ws = workspace(cfg, c, cache);
  std::ostringstream os;
  os << "path_id,t,A\n";
  for (std::size_t i = 0; i < ws.ensemble.n_paths; ++i)
    for (std::size_t k = 0; k < ws.ensemble.n_points(); ++k)
      os << i << ',' << ifsm::format_number(ws.time_grid.at(k)) << ',' << ifsm::format_number(ws.ensemble.at(i, k))
         << '\n';
  emit(c, "paths.csv", os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indicator fractional stable motion simulator"};
  app.require_subcommand(1);
  Common c;
  std::uint64_t seed = 0;
  app.add_option("--config", c.config_path, "YAML run config (defaults when omitted)");
  auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides the config");
  app.add_option("--out", c.out_dir, "output directory");
  app.add_option("--threads", c.threads, "OpenMP threads (0: default)");
  app.add_flag("--strict", c.strict, "reject unknown config keys");
  app.add_flag_callback("--quiet", [] { spdlog::set_level(spdlog::level::warn); }, "only log warnings");

  std::string times, form;
  std::size_t replicates = 0;
  auto* simulate = app.add_subcommand("simulate", "sample the configured process at given times");
  simulate->add_option("--times", times, "comma-separated grid times (default: 8 log-spaced)");
  simulate->add_option("--replicates", replicates, "replicate count (default: config n_replicates)");
  auto* oracle = app.add_subcommand("oracle", "characteristic-functional exponent of a linear form");
  oracle->add_option("--form", form, "theta:t:s,theta:t:s,...")->required();
  auto* verify = app.add_subcommand("verify", "run the configured experiments; exit 0 iff all pass");
  auto* report = app.add_subcommand("report", "re-derive verdicts from the CSVs of a verify run");
  auto* export_paths = app.add_subcommand("export-paths", "write the main subordinator ensemble as CSV");
  app.fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) c.seed = seed;
  try {
    if (*simulate) return cmd_simulate(c, times, replicates);
    if (*oracle) return cmd_oracle(c, form);
    if (*verify) return cmd_verify(c);
    if (*report) return cmd_report(c);
    if (*export_paths) return cmd_export_paths(c);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
