#include "ifsm/runner.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "ifsm/cache.hpp"
#include "ifsm/diagnostics.hpp"
#include "ifsm/oracle.hpp"
#include "ifsm/stats.hpp"

namespace ifsm {

// ---------------------------------------------------------------------------
// Tables

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

}  // namespace

void Table::write_csv(const std::filesystem::path& file) const {
  std::ofstream os(file, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << csv_escape(columns[c]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << csv_escape(row[c]);
    os << '\n';
  }
}

Table Table::read_csv(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(file.string() + " is empty");
  t.columns = csv_split(line);
  while (std::getline(is, line))
    if (!line.empty()) t.rows.push_back(csv_split(line));
  return t;
}

std::size_t Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("table has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

double Table::number(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(column(name))); }

// ---------------------------------------------------------------------------
// Verdicts

namespace {

const Table& table(const std::map<std::string, Table>& tables, const std::string& stem) {
  const auto it = tables.find(stem);
  if (it == tables.end()) throw std::runtime_error("missing table '" + stem + "'");
  return it->second;
}

bool verdict_feasibility(const std::map<std::string, Table>& tables) {
  const auto& t = table(tables, "feasibility");
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (t.number(r, "range_ok") != 1.0) return false;
  return !t.rows.empty();
}

bool verdict_selfsim(const std::map<std::string, Table>& tables, const Tolerances& tol) {
  const auto& t = table(tables, "exponent_fits");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (!(std::abs(t.number(r, "H_hat") - t.number(r, "H_expected")) < tol.selfsim_abs)) return false;
    if (!(t.number(r, "r_squared") > tol.selfsim_r2)) return false;
  }
  return !t.rows.empty();
}

bool verdict_stationarity(const std::map<std::string, Table>& tables) {
  const auto& t = table(tables, "stationarity");
  const auto kind = t.column("kind");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double d = t.number(r, "distance"), crit = t.number(r, "critical");
    if (t.rows[r][kind] == "process" && !(d < crit)) return false;
    if (t.rows[r][kind] == "broken_control" && !(d > crit)) return false;
  }
  return !t.rows.empty();
}

bool verdict_signkernel(const std::map<std::string, Table>& tables, const Tolerances& tol) {
  const auto& t = table(tables, "signkernel");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double dre = t.number(r, "re_ind") - t.number(r, "re_sgn");
    const double dim = t.number(r, "im_ind") - t.number(r, "im_sgn");
    const double se = std::sqrt(std::pow(t.number(r, "se_re_ind"), 2) + std::pow(t.number(r, "se_im_ind"), 2) +
                                std::pow(t.number(r, "se_re_sgn"), 2) + std::pow(t.number(r, "se_im_sgn"), 2));
    if (!(std::hypot(dre, dim) < tol.signkernel_se * se)) return false;
  }
  return !t.rows.empty();
}

bool verdict_charmatch(const std::map<std::string, Table>& tables, const Tolerances& tol) {
  const auto& t = table(tables, "charmatch");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double value = std::exp(-t.number(r, "exponent"));
    const double dre = t.number(r, "re") - value;
    const double dim = t.number(r, "im");
    const double se = std::sqrt(std::pow(t.number(r, "se_re"), 2) + std::pow(t.number(r, "se_im"), 2) +
                                std::pow(value * t.number(r, "exponent_se"), 2));
    if (!(std::hypot(dre, dim) < tol.charmatch_se * se)) return false;
  }
  return !t.rows.empty();
}

bool verdict_mixing(const std::map<std::string, Table>& tables, const Tolerances& tol) {
  const auto& t = table(tables, "mixing");
  if (t.rows.empty()) return false;
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    if (!(t.number(r, "mu") <= t.number(r, "bound"))) return false;
  return t.number(t.rows.size() - 1, "mu") < tol.mixing_ratio * t.number(0, "mu");
}

bool verdict_conservativity(const std::map<std::string, Table>& tables, const Tolerances& tol) {
  const auto& sums = table(tables, "conservativity");
  const auto& growth = table(tables, "conservativity_growth");
  for (std::size_t r = 0; r < growth.rows.size(); ++r) {
    const double x = growth.number(r, "x");
    if (!(std::abs(growth.number(r, "growth_exponent") - growth.number(r, "expected")) < tol.growth_band))
      return false;
    double prev = -1.0, last = 0.0;
    for (std::size_t k = 0; k < sums.rows.size(); ++k) {
      if (sums.number(k, "x") != x) continue;
      const double s = sums.number(k, "S");
      if (s < prev) return false;
      prev = last = s;
    }
    if (!(last > tol.conservativity_min)) return false;
  }
  return !growth.rows.empty();
}

bool verdict_extreme(const std::map<std::string, Table>& tables, const Tolerances& tol) {
  const auto& t = table(tables, "extreme");
  const auto series = t.column("series");
  auto ratio = [&](const std::string& name) {
    double first = NAN, last = NAN;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (t.rows[r][series] != name) continue;
      if (std::isnan(first)) first = t.number(r, "median");
      last = t.number(r, "median");
    }
    return last / first;
  };
  return ratio("process") < tol.extreme_ratio && ratio("iid_control") >= tol.extreme_ratio;
}

}  // namespace

bool verdict(Experiment experiment, const std::map<std::string, Table>& tables, const RunConfig& config) {
  const auto& tol = config.tolerances;
  switch (experiment) {
    case Experiment::feasibility: return verdict_feasibility(tables);
    case Experiment::selfsim: return verdict_selfsim(tables, tol);
    case Experiment::stationarity: return verdict_stationarity(tables);
    case Experiment::signkernel: return verdict_signkernel(tables, tol);
    case Experiment::charmatch: return verdict_charmatch(tables, tol);
    case Experiment::mixing: return verdict_mixing(tables, tol);
    case Experiment::conservativity: return verdict_conservativity(tables, tol);
    case Experiment::extreme: return verdict_extreme(tables, tol);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Orchestration

double fit_half_width(const SubordinatorEnsemble& pilot) {
  std::vector<double> peaks(pilot.n_paths);
  for (std::size_t i = 0; i < pilot.n_paths; ++i) {
    double m = 0.0;
    for (double a : pilot.path(i)) m = std::max(m, std::abs(a));
    peaks[i] = m;
  }
  return std::max(stats::quantile(peaks, 0.999), 1e-6);
}

namespace {

enum StreamTag : std::uint64_t {
  kMainEnsemble = 1,
  kPilotEnsemble = 2,
  kSelfsim = 10,
  kStationarity = 11,
  kBrokenControl = 12,
  kSignIndicator = 13,
  kSignSigned = 14,
  kCharmatch = 15,
  kMixingEnsemble = 20,
  kConservativityEnsemble = 21,
  kExtremeEnsemble = 22,
  kExtremeNoise = 23,
  kExtremeControl = 24,
};

std::string fmt_form(const LinearForm& f) { return f.to_string(); }

SubordinatorEnsemble draw_ensemble(const RunConfig& cfg, const TimeGrid& grid, std::size_t n_paths,
                                   std::uint64_t tag, cache::EnsembleCache* cache) {
  const SeededRng rng = SeededRng(cfg.seed).substream(tag);
  if (cache) return cache->get(cfg.subordinator, grid, n_paths, rng);
  return sample_ensemble(cfg.subordinator, grid, n_paths, rng);
}

class Runner {
 public:
  Runner(const RunConfig& cfg, cache::EnsembleCache* cache)
      : cfg_(cfg), spec_(cfg.alpha), master_(cfg.seed), cache_(cache),
        time_grid_(cfg.t_max, cfg.n_steps), grid_(1.0, 1) {
    feasibility_ = feasibility_check(spec_, cfg.subordinator, cfg.process);
  }

  void prepare() {
    auto ws = prepare_workspace(cfg_, cache_);
    grid_ = ws.grid;
    ensemble_ = std::move(ws.ensemble);
    if (cfg_.process != ProcessKind::Levy)
      truncation_["main"] = {{"half_width", grid_.half_width()},
                             {"dx", grid_.dx()},
                             {"mass_at_t_max", truncation_mass(*ensemble_, grid_, time_grid_.n_steps())}};
  }

  ExperimentResult execute(Experiment e) {
    ExperimentResult res;
    res.experiment = e;
    switch (e) {
      case Experiment::feasibility: feasibility(res); break;
      case Experiment::selfsim: selfsim(res); break;
      case Experiment::stationarity: stationarity(res); break;
      case Experiment::signkernel: signkernel(res); break;
      case Experiment::charmatch: charmatch(res); break;
      case Experiment::mixing: mixing(res); break;
      case Experiment::conservativity: conservativity(res); break;
      case Experiment::extreme: extreme(res); break;
    }
    if (res.applicable) res.pass = verdict(e, res.tables, cfg_);
    return res;
  }

  nlohmann::json truncation() const { return truncation_; }

 private:
  SubordinatorEnsemble ensemble(const TimeGrid& grid, std::size_t n_paths, std::uint64_t tag) {
    return draw_ensemble(cfg_, grid, n_paths, tag, cache_);
  }

  Kernel process_kernel() const { return ifsm::process_kernel(cfg_.process); }

  // Simulates the configured process; LTFSM computes local times at `times` first.
  std::vector<ProcessSample> simulate(const std::vector<double>& times, std::uint64_t tag, std::size_t replicates,
                                      const SubordinatorEnsemble& ens, Kernel kernel) {
    std::optional<LocalTimeField> lt;
    if (kernel.kind == KernelKind::LocalTime) {
      lt.emplace(compute_local_time(ens, grid_, time_indices(ens.grid, times)));
      kernel.local_time = &*lt;
    }
    return simulate_process(kernel, ens, grid_, times, spec_, master_.substream(tag), replicates);
  }

  double panel_unit() const {
    const double u = std::min(1.0, cfg_.t_max / 3.0);
    for (double t : {0.5 * u, u, 2.0 * u, 3.0 * u})
      if (!time_grid_.contains(t)) throw std::invalid_argument("time grid cannot host the form panel");
    return u;
  }

  void feasibility(ExperimentResult& res) {
    Table t{{"process", "alpha", "H_prime", "H", "range_lo", "range_hi", "range_ok"}, {}};
    const auto& f = feasibility_;
    t.rows.push_back({to_string(cfg_.process), format_number(cfg_.alpha),
                      format_number(cfg_.process == ProcessKind::Levy ? 1.0 : cfg_.subordinator.self_similarity()),
                      format_number(f.H), format_number(f.range_lo), format_number(f.range_hi),
                      f.range_ok ? "1" : "0"});
    res.metrics = {{"H", f.H}, {"range", {f.range_lo, f.range_hi}}, {"range_ok", f.range_ok}};
    res.tables["feasibility"] = std::move(t);
  }

  void selfsim(ExperimentResult& res) {
    const auto times = log_spaced_grid_times(time_grid_, 8);
    const auto samples = simulate(times, kSelfsim, cfg_.n_replicates, *ensemble_, process_kernel());
    const auto fit = estimate_selfsim_exponent(samples, cfg_.quantile_p);
    const std::string label = to_string(cfg_.process) + "(alpha=" + format_number(cfg_.alpha) + ")";
    res.tables["exponent_fits"] = Table{{"config", "H_hat", "stderr", "H_expected", "r_squared", "p"},
                                        {{label, format_number(fit.H_hat), format_number(fit.std_error),
                                          format_number(feasibility_.H), format_number(fit.r_squared),
                                          format_number(fit.p)}}};
    Table q{{"t", "quantile"}, {}};
    for (std::size_t k = 0; k < fit.times.size(); ++k)
      q.rows.push_back({format_number(fit.times[k]), format_number(fit.quantiles[k])});
    res.tables["selfsim_quantiles"] = std::move(q);
    res.metrics = {{"H_hat", fit.H_hat}, {"stderr", fit.std_error}, {"H_expected", feasibility_.H},
                   {"r_squared", fit.r_squared}};
  }

  void stationarity(ExperimentResult& res) {
    const double span = time_grid_.contains(1.0) && cfg_.t_max >= 2.0 ? 1.0 : time_grid_.at(time_grid_.n_steps() / 4);
    std::vector<double> shifts;
    for (double h : {1.0, 5.0, 10.0})
      if (span * h + span <= cfg_.t_max + 1e-12 && time_grid_.contains(span * h)) shifts.push_back(span * h);
    if (shifts.empty()) throw std::invalid_argument("time grid too short for the stationarity shifts");
    std::vector<double> times{span};
    for (double h : shifts) {
      times.push_back(h);
      times.push_back(span + h);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    const auto samples = simulate(times, kStationarity, cfg_.n_replicates, *ensemble_, process_kernel());
    const auto result = stationarity_distance(samples, span, shifts);
    Table t{{"kind", "h", "distance", "critical"}, {}};
    for (std::size_t k = 0; k < shifts.size(); ++k)
      t.rows.push_back({"process", format_number(shifts[k]), format_number(result.distances[k]),
                        format_number(result.critical_value)});
    res.metrics = {{"t_span", span}, {"max_distance", result.max_distance}, {"critical", result.critical_value}};

    if (cfg_.process == ProcessKind::IFSM) {
      // Power check: pin A_h = 0 at every shift, breaking stationary increments.
      SubordinatorEnsemble broken = *ensemble_;
      for (double h : shifts) {
        const auto k = time_grid_.index_of(h);
        for (std::size_t i = 0; i < broken.n_paths; ++i) broken.path(i)[k] = 0.0;
      }
      const auto control = simulate(times, kBrokenControl, cfg_.n_replicates, broken, Kernel::indicator());
      const auto power = stationarity_distance(control, span, shifts);
      for (std::size_t k = 0; k < shifts.size(); ++k)
        t.rows.push_back({"broken_control", format_number(shifts[k]), format_number(power.distances[k]),
                          format_number(power.critical_value)});
      res.metrics["broken_control_max_distance"] = power.max_distance;
    }
    res.tables["stationarity"] = std::move(t);
  }

  void signkernel(ExperimentResult& res) {
    if (cfg_.process != ProcessKind::IFSM) {
      res.applicable = false;
      res.note = "sign-kernel equivalence concerns the indicator kernel only";
      return;
    }
    const auto panel = standard_form_panel(panel_unit());
    const auto times = panel_times(panel);
    const auto ind = simulate(times, kSignIndicator, cfg_.n_replicates, *ensemble_, Kernel::indicator());
    const auto sgn = simulate(times, kSignSigned, cfg_.n_replicates, *ensemble_, Kernel::signed_indicator());
    Table t{{"form", "re_ind", "im_ind", "se_re_ind", "se_im_ind", "re_sgn", "im_sgn", "se_re_sgn", "se_im_sgn"}, {}};
    for (const auto& form : panel) {
      const auto a = empirical_char(ind, form), b = empirical_char(sgn, form);
      t.rows.push_back({fmt_form(form), format_number(a.re), format_number(a.im), format_number(a.se_re),
                        format_number(a.se_im), format_number(b.re), format_number(b.im), format_number(b.se_re),
                        format_number(b.se_im)});
    }
    res.metrics = {{"forms", panel.size()}};
    res.tables["signkernel"] = std::move(t);
  }

  void charmatch(ExperimentResult& res) {
    const auto panel = standard_form_panel(panel_unit());
    const auto times = panel_times(panel);
    Kernel kernel = process_kernel();
    std::optional<LocalTimeField> lt;
    if (kernel.kind == KernelKind::LocalTime) {
      lt.emplace(compute_local_time(*ensemble_, grid_, time_indices(time_grid_, times)));
      kernel.local_time = &*lt;
    }
    const auto samples =
        simulate_process(kernel, *ensemble_, grid_, times, spec_, master_.substream(kCharmatch), cfg_.n_replicates);
    Table t{{"form", "re", "im", "se_re", "se_im", "exponent", "exponent_se"}, {}};
    double worst = 0.0;
    for (const auto& form : panel) {
      const auto emp = empirical_char(samples, form);
      const auto oracle = exponent_integral(form, kernel, *ensemble_, grid_, spec_);
      t.rows.push_back({fmt_form(form), format_number(emp.re), format_number(emp.im), format_number(emp.se_re),
                        format_number(emp.se_im), format_number(oracle.exponent), format_number(oracle.std_error)});
      worst = std::max(worst, std::hypot(emp.re - oracle.value, emp.im));
    }
    res.metrics = {{"forms", panel.size()}, {"max_abs_deviation", worst}, {"shared_ensemble", true}};
    res.tables["charmatch"] = std::move(t);
  }

  void mixing(ExperimentResult& res) {
    if (cfg_.process == ProcessKind::Levy) {
      res.applicable = false;
      res.note = "no subordinator in the degenerate Levy case";
      return;
    }
    const std::size_t n_max = cfg_.mixing.n_max;
    const TimeGrid grid(static_cast<double>(n_max + 1), n_max + 1);
    const auto ens = ensemble(grid, cfg_.mixing.n_paths, kMixingEnsemble);
    auto curve = mixing_curve(ens, n_max);
    const SymmetricLaw law(ens.column(grid.index_of(1.0)));
    const double beta = cfg_.subordinator.kind == SubordinatorKind::FBM ? 2.0 : cfg_.subordinator.beta;
    const auto constants = fit_tail_constants(law, beta);
    attach_bound(curve, constants, cfg_.subordinator.self_similarity(), law);
    Table t{{"n", "mu", "stderr", "bound"}, {}};
    for (std::size_t k = 0; k < curve.n.size(); ++k)
      t.rows.push_back({std::to_string(curve.n[k]), format_number(curve.mu[k]), format_number(curve.std_error[k]),
                        format_number(curve.bound[k])});
    res.metrics = {{"mu_1", curve.mu.front()}, {"mu_n_max", curve.mu.back()},  {"c1", constants.c1},
                   {"c2", constants.c2},       {"beta", constants.beta},       {"n_paths", ens.n_paths}};
    res.tables["mixing"] = std::move(t);
  }

  void conservativity(ExperimentResult& res) {
    if (cfg_.process == ProcessKind::Levy) {
      res.applicable = false;
      res.note = "no subordinator in the degenerate Levy case";
      return;
    }
    const std::size_t N = cfg_.conservativity.n_sum;
    const TimeGrid grid(static_cast<double>(N), N);
    const auto ens = ensemble(grid, cfg_.conservativity.n_paths, kConservativityEnsemble);
    const auto curves = conservativity_sum(ens, cfg_.conservativity.probes, N);
    const double expected = 1.0 - cfg_.subordinator.self_similarity();
    Table sums{{"x", "N", "S"}, {}};
    Table growth{{"x", "growth_exponent", "expected"}, {}};
    nlohmann::json per_probe = nlohmann::json::array();
    for (const auto& c : curves) {
      for (std::size_t n = 0; n < c.S.size(); ++n)
        sums.rows.push_back({format_number(c.x), std::to_string(n), format_number(c.S[n])});
      growth.rows.push_back({format_number(c.x), format_number(c.growth_exponent), format_number(expected)});
      per_probe.push_back({{"x", c.x}, {"S_N", c.S.back()}, {"growth_exponent", c.growth_exponent}});
    }
    res.metrics = {{"probes", per_probe}, {"expected_growth", expected}};
    res.tables["conservativity"] = std::move(sums);
    res.tables["conservativity_growth"] = std::move(growth);
  }

  void extreme(ExperimentResult& res) {
    if (cfg_.process != ProcessKind::IFSM) {
      res.applicable = false;
      res.note = "extreme-value check is run for indicator fractional stable noise";
      return;
    }
    const std::size_t n_max = cfg_.extreme.n_max;
    const TimeGrid grid(static_cast<double>(n_max), n_max);
    const auto ens = ensemble(grid, cfg_.extreme.n_paths, kExtremeEnsemble);
    double reach = 0.0;
    for (double a : ens.values) reach = std::max(reach, std::abs(a));
    const SpatialGrid x_grid(std::max(reach, 1.0) * (1.0 + 1e-9), cfg_.cells_per_side);
    const auto noise = simulate_noise(ens, x_grid, n_max, spec_, master_.substream(kExtremeNoise),
                                      cfg_.extreme.n_replicates);
    const SpatialGrid levy_grid(static_cast<double>(n_max), cfg_.cells_per_side);
    const auto control = simulate_noise(ens, levy_grid, n_max, spec_, master_.substream(kExtremeControl),
                                        cfg_.extreme.n_replicates, Kernel::levy());
    const std::vector<std::size_t> ns{cfg_.extreme.n_small, n_max};
    const auto a = extreme_value_stat(noise, ns, cfg_.alpha);
    const auto b = extreme_value_stat(control, ns, cfg_.alpha);
    Table t{{"series", "n", "median"}, {}};
    for (const auto& p : a) t.rows.push_back({"process", std::to_string(p.n), format_number(p.median)});
    for (const auto& p : b) t.rows.push_back({"iid_control", std::to_string(p.n), format_number(p.median)});
    res.metrics = {{"process_ratio", a.back().median / a.front().median},
                   {"control_ratio", b.back().median / b.front().median}};
    res.tables["extreme"] = std::move(t);
  }

  static std::vector<double> panel_times(const std::vector<LinearForm>& panel) {
    std::vector<double> times;
    for (const auto& f : panel)
      for (double t : f.times()) times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
  }

  const RunConfig& cfg_;
  StableSpec spec_;
  SeededRng master_;
  cache::EnsembleCache* cache_;
  TimeGrid time_grid_;
  SpatialGrid grid_;
  std::optional<SubordinatorEnsemble> ensemble_;
  Feasibility feasibility_;
  nlohmann::json truncation_ = nlohmann::json::object();
};

}  // namespace

Kernel process_kernel(ProcessKind process) {
  switch (process) {
    case ProcessKind::IFSM: return Kernel::indicator();
    case ProcessKind::LTFSM: return Kernel{KernelKind::LocalTime, nullptr};
    case ProcessKind::Levy: return Kernel::levy();
  }
  return Kernel::indicator();
}

Workspace prepare_workspace(const RunConfig& cfg, cache::EnsembleCache* cache) {
  const TimeGrid time_grid(cfg.t_max, cfg.n_steps);
  if (cfg.process == ProcessKind::Levy)
    return {time_grid, SpatialGrid(cfg.t_max, cfg.cells_per_side),
            SubordinatorEnsemble{cfg.subordinator, time_grid, 1, cfg.seed, PathSynthesis::External,
                                 std::vector<double>(time_grid.n_points(), 0.0)}};
  double half_width = 0.0;
  if (cfg.half_width) {
    half_width = *cfg.half_width;
  } else {
    const auto pilot = draw_ensemble(cfg, time_grid, std::min<std::size_t>(cfg.n_paths, 1000), kPilotEnsemble, cache);
    half_width = fit_half_width(pilot);
    spdlog::info("x-grid half-width fitted from pilot ensemble: X = {:.6g}", half_width);
  }
  return {time_grid, SpatialGrid(half_width, cfg.cells_per_side),
          draw_ensemble(cfg, time_grid, cfg.n_paths, kMainEnsemble, cache)};
}

std::vector<ProcessSample> simulate_configured(const RunConfig& cfg, const Workspace& ws,
                                               const std::vector<double>& times, std::size_t n_replicates,
                                               const SeededRng& rng) {
  Kernel kernel = process_kernel(cfg.process);
  std::optional<LocalTimeField> lt;
  if (kernel.kind == KernelKind::LocalTime) {
    lt.emplace(compute_local_time(ws.ensemble, ws.grid, time_indices(ws.time_grid, times)));
    kernel.local_time = &*lt;
  }
  return simulate_process(kernel, ws.ensemble, ws.grid, times, StableSpec(cfg.alpha), rng, n_replicates);
}

nlohmann::json RunReport::to_json() const {
  nlohmann::json exps = nlohmann::json::array();
  for (const auto& r : results)
    exps.push_back({{"name", to_string(r.experiment)},
                    {"applicable", r.applicable},
                    {"pass", r.pass},
                    {"note", r.note},
                    {"metrics", r.metrics}});
  return {{"schema_version", kReportSchemaVersion},
          {"config", ifsm::to_json(config)},
          {"experiments", exps},
          {"truncation", truncation},
          {"all_pass", all_pass}};
}

nlohmann::json RunReport::run_log() const {
  return {{"schema_version", kReportSchemaVersion},
          {"wall_time_s", wall_time_s},
          {"within_runtime_budget", wall_time_s <= config.tolerances.runtime_budget_s},
          {"cache_hits", cache_hits},
          {"cache_misses", cache_misses},
          {"threads", threads}};
}

RunReport run(const RunConfig& config, const RunOptions& options) {
  if (const auto errors = validate_config(config); !errors.empty())
    throw std::invalid_argument("invalid config: " + errors.front());
  if (options.threads > 0) omp_set_num_threads(options.threads);
  const auto start = std::chrono::steady_clock::now();

  std::optional<cache::EnsembleCache> cache;
  if (options.cache_dir)
    cache.emplace(*options.cache_dir);
  else if (options.out_dir)
    cache.emplace(*options.out_dir / "cache");

  RunReport report;
  report.config = config;
  report.threads = omp_get_max_threads();
  Runner runner(config, cache ? &*cache : nullptr);
  runner.prepare();

  std::vector<Experiment> order;
  for (auto e : all_experiments())
    if (std::find(config.experiments.begin(), config.experiments.end(), e) != config.experiments.end())
      order.push_back(e);
  for (auto e : order) {
    spdlog::info("running experiment {}", to_string(e));
    try {
      report.results.push_back(runner.execute(e));
    } catch (const std::exception& ex) {
      throw std::runtime_error("experiment " + to_string(e) + ": " + ex.what());
    }
    const auto& r = report.results.back();
    spdlog::info("experiment {}: {}", to_string(e), !r.applicable ? "n/a" : (r.pass ? "PASS" : "FAIL"));
    report.all_pass = report.all_pass && r.pass;
  }
  report.truncation = runner.truncation();
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (cache) {
    report.cache_hits = cache->hits();
    report.cache_misses = cache->misses();
  }
  if (report.wall_time_s > config.tolerances.runtime_budget_s)
    spdlog::warn("run took {:.1f} s, over the {:.0f} s budget", report.wall_time_s,
                 config.tolerances.runtime_budget_s);

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    for (const auto& r : report.results)
      for (const auto& [stem, t] : r.tables) t.write_csv(*options.out_dir / (stem + ".csv"));
    std::ofstream(*options.out_dir / "report.json") << report.to_json().dump(2) << '\n';
    std::ofstream(*options.out_dir / "run_log.json") << report.run_log().dump(2) << '\n';
  }
  return report;
}

std::map<Experiment, bool> derive_verdicts(const std::filesystem::path& out_dir, const RunConfig& config) {
  static const std::map<Experiment, std::vector<std::string>> stems = {
      {Experiment::feasibility, {"feasibility"}},
      {Experiment::selfsim, {"exponent_fits"}},
      {Experiment::stationarity, {"stationarity"}},
      {Experiment::signkernel, {"signkernel"}},
      {Experiment::charmatch, {"charmatch"}},
      {Experiment::mixing, {"mixing"}},
      {Experiment::conservativity, {"conservativity", "conservativity_growth"}},
      {Experiment::extreme, {"extreme"}},
  };
  std::map<Experiment, bool> out;
  for (auto e : config.experiments) {
    std::map<std::string, Table> tables;
    bool present = true;
    for (const auto& stem : stems.at(e)) {
      const auto file = out_dir / (stem + ".csv");
      if (!std::filesystem::exists(file)) {
        present = false;
        break;
      }
      tables[stem] = Table::read_csv(file);
    }
    if (present) out[e] = verdict(e, tables, config);
  }
  return out;
}

}  // namespace ifsm
