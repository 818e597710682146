#include "ifsm/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace ifsm {

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::selfsim: return "selfsim";
    case Experiment::stationarity: return "stationarity";
    case Experiment::signkernel: return "signkernel";
    case Experiment::charmatch: return "charmatch";
    case Experiment::mixing: return "mixing";
    case Experiment::conservativity: return "conservativity";
    case Experiment::extreme: return "extreme";
    case Experiment::feasibility: return "feasibility";
  }
  return "unknown";
}

std::vector<Experiment> all_experiments() {
  return {Experiment::feasibility, Experiment::selfsim,        Experiment::stationarity, Experiment::signkernel,
          Experiment::charmatch,   Experiment::mixing,         Experiment::conservativity, Experiment::extreme};
}

std::optional<Experiment> experiment_from_string(const std::string& name) {
  for (auto e : all_experiments())
    if (to_string(e) == name) return e;
  return std::nullopt;
}

namespace {

class Reader {
 public:
  Reader(bool strict, ParseResult& result) : strict_(strict), result_(result) {}

  // Flags keys of `node` that are not in `allowed`.
  void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
    if (!node || !node.IsMap()) return;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (allowed.count(key)) continue;
      const std::string msg = "unknown key '" + (section.empty() ? key : section + "." + key) + "'";
      (strict_ ? result_.errors : result_.notices).push_back(msg);
    }
  }

  template <class T>
  void read(const YAML::Node& node, const std::string& key, T& target, const std::string& section) {
    if (!node || !node[key]) return;
    try {
      target = node[key].as<T>();
    } catch (const YAML::Exception&) {
      result_.errors.push_back("'" + (section.empty() ? key : section + "." + key) + "' has the wrong type");
    }
  }

  YAML::Node section(const YAML::Node& root, const std::string& name) {
    if (!root[name]) return YAML::Node();
    if (!root[name].IsMap()) {
      result_.errors.push_back("section '" + name + "' must be a mapping");
      return YAML::Node();
    }
    return root[name];
  }

 private:
  bool strict_;
  ParseResult& result_;
};

}  // namespace

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> errors;
  auto require = [&errors](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };
  require(c.alpha > 0.0 && c.alpha <= 2.0, "alpha must lie in (0,2] (stability index of a SaS law)");
  const auto& s = c.subordinator;
  require(s.sigma > 0.0 && std::isfinite(s.sigma), "subordinator.sigma must be positive");
  if (s.kind == SubordinatorKind::FBM) {
    const bool degenerate = s.hurst == 1.0 && c.process == ProcessKind::Levy;
    require((s.hurst > 0.0 && s.hurst < 1.0) || degenerate,
            "subordinator.hurst must lie in (0,1) (non-degenerate SSSI subordinator), or equal 1 for the "
            "degenerate Levy case");
  } else {
    require(s.beta > 1.0 && s.beta <= 2.0,
            "subordinator.beta must lie in (1,2] (SbS Levy subordinator with a finite first absolute moment)");
  }
  if (c.process == ProcessKind::LTFSM && s.kind == SubordinatorKind::FBM)
    require(s.hurst > 0.0 && s.hurst < 1.0, "LTFSM needs a subordinator with a local time");
  require(c.t_max > 0.0 && std::isfinite(c.t_max), "time.t_max must be positive");
  require(c.n_steps >= 1, "time.n_steps must be at least 1");
  require(!c.half_width || (*c.half_width > 0.0 && std::isfinite(*c.half_width)),
          "space.half_width must be positive or 'auto'");
  require(c.cells_per_side >= 1, "space.cells_per_side must be at least 1");
  require(c.n_paths >= 1, "simulation.n_paths must be at least 1");
  require(c.n_replicates >= 100, "simulation.n_replicates must be at least 100 (empirical characteristic function)");
  require(c.quantile_p > 0.0 && c.quantile_p < 1.0, "simulation.quantile_p must lie in (0,1)");
  const auto has = [&c](Experiment e) {
    return std::find(c.experiments.begin(), c.experiments.end(), e) != c.experiments.end();
  };
  if (has(Experiment::selfsim))
    require(c.n_replicates >= 1000, "selfsim needs simulation.n_replicates >= 1000");
  const auto& t = c.tolerances;
  for (double v : {t.selfsim_abs, t.charmatch_se, t.signkernel_se, t.mixing_ratio, t.conservativity_min,
                   t.extreme_ratio, t.runtime_budget_s})
    if (!(v > 0.0)) {
      errors.push_back("tolerances must be positive");
      break;
    }
  require(t.ks_level > 0.0 && t.ks_level < 1.0, "tolerances.ks_level must lie in (0,1)");
  require(t.selfsim_r2 > 0.0 && t.selfsim_r2 <= 1.0, "tolerances.selfsim_r2 must lie in (0,1]");
  require(t.growth_band > 0.0 && t.growth_band < 1.0, "tolerances.growth_band must lie in (0,1)");
  require(c.mixing.n_max >= 1 && c.mixing.n_paths >= 1, "mixing.n_max and mixing.n_paths must be positive");
  require(c.conservativity.n_sum >= 1 && c.conservativity.n_paths >= 1,
          "conservativity.n_sum and conservativity.n_paths must be positive");
  require(!c.conservativity.probes.empty(), "conservativity.probes must not be empty");
  require(c.extreme.n_small >= 1 && c.extreme.n_small < c.extreme.n_max,
          "extreme.n_small must lie in [1, extreme.n_max)");
  require(c.extreme.n_paths >= 1 && c.extreme.n_replicates >= 1, "extreme sizes must be positive");
  return errors;
}

ParseResult parse_config(const std::string& text, bool strict) {
  ParseResult result;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    result.errors.push_back(std::string("malformed config: ") + e.what());
    return result;
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) {
    result.errors.push_back("config must be a mapping of sections");
    return result;
  }

  Reader rd(strict, result);
  RunConfig c;
  rd.check_keys(root, "", {"process", "alpha", "seed", "subordinator", "time", "space", "simulation", "experiments",
                           "tolerances", "mixing", "conservativity", "extreme"});

  std::string process = to_string(c.process);
  rd.read(root, "process", process, "");
  try {
    c.process = process_kind_from_string(process);
  } catch (const std::invalid_argument&) {
    result.errors.push_back("process must be one of IFSM, LTFSM, Levy (got '" + process + "')");
  }
  rd.read(root, "alpha", c.alpha, "");
  rd.read(root, "seed", c.seed, "");

  if (auto sub = rd.section(root, "subordinator")) {
    rd.check_keys(sub, "subordinator", {"kind", "hurst", "beta", "sigma"});
    std::string kind = to_string(c.subordinator.kind);
    rd.read(sub, "kind", kind, "subordinator");
    try {
      c.subordinator.kind = subordinator_kind_from_string(kind);
    } catch (const std::invalid_argument&) {
      result.errors.push_back("subordinator.kind must be FBM or StableLevy (got '" + kind + "')");
    }
    rd.read(sub, "hurst", c.subordinator.hurst, "subordinator");
    rd.read(sub, "beta", c.subordinator.beta, "subordinator");
    rd.read(sub, "sigma", c.subordinator.sigma, "subordinator");
  }
  if (c.subordinator.kind == SubordinatorKind::StableLevy) {
    if (c.subordinator.beta != 0.0) c.subordinator.hurst = 1.0 / c.subordinator.beta;
  } else {
    c.subordinator.beta = 2.0;
    if (c.subordinator.hurst == 1.0) {
      c.process = ProcessKind::Levy;
      result.notices.push_back(
          "subordinator.hurst = 1 is the degenerate Levy case: the kernel becomes the deterministic 1_[0,t] and the "
          "process is SaS Levy motion");
    }
  }

  if (auto time = rd.section(root, "time")) {
    rd.check_keys(time, "time", {"t_max", "n_steps"});
    rd.read(time, "t_max", c.t_max, "time");
    rd.read(time, "n_steps", c.n_steps, "time");
  }
  if (auto space = rd.section(root, "space")) {
    rd.check_keys(space, "space", {"half_width", "cells_per_side"});
    if (space["half_width"]) {
      const auto& hw = space["half_width"];
      if (hw.IsScalar() && hw.Scalar() == "auto") {
        c.half_width.reset();
      } else {
        double v = 0.0;
        rd.read(space, "half_width", v, "space");
        c.half_width = v;
      }
    }
    rd.read(space, "cells_per_side", c.cells_per_side, "space");
  }
  if (auto sim = rd.section(root, "simulation")) {
    rd.check_keys(sim, "simulation", {"n_paths", "n_replicates", "quantile_p"});
    rd.read(sim, "n_paths", c.n_paths, "simulation");
    rd.read(sim, "n_replicates", c.n_replicates, "simulation");
    rd.read(sim, "quantile_p", c.quantile_p, "simulation");
  }
  if (root["experiments"]) {
    std::vector<std::string> names;
    rd.read(root, "experiments", names, "");
    c.experiments.clear();
    for (const auto& n : names) {
      if (auto e = experiment_from_string(n))
        c.experiments.push_back(*e);
      else
        result.errors.push_back("unknown experiment '" + n + "'");
    }
  }
  if (auto tol = rd.section(root, "tolerances")) {
    auto& t = c.tolerances;
    rd.check_keys(tol, "tolerances",
                  {"selfsim_abs", "selfsim_r2", "charmatch_se", "signkernel_se", "ks_level", "mixing_ratio",
                   "conservativity_min", "growth_band", "extreme_ratio", "runtime_budget_s"});
    rd.read(tol, "selfsim_abs", t.selfsim_abs, "tolerances");
    rd.read(tol, "selfsim_r2", t.selfsim_r2, "tolerances");
    rd.read(tol, "charmatch_se", t.charmatch_se, "tolerances");
    rd.read(tol, "signkernel_se", t.signkernel_se, "tolerances");
    rd.read(tol, "ks_level", t.ks_level, "tolerances");
    rd.read(tol, "mixing_ratio", t.mixing_ratio, "tolerances");
    rd.read(tol, "conservativity_min", t.conservativity_min, "tolerances");
    rd.read(tol, "growth_band", t.growth_band, "tolerances");
    rd.read(tol, "extreme_ratio", t.extreme_ratio, "tolerances");
    rd.read(tol, "runtime_budget_s", t.runtime_budget_s, "tolerances");
  }
  if (auto mix = rd.section(root, "mixing")) {
    rd.check_keys(mix, "mixing", {"n_max", "n_paths"});
    rd.read(mix, "n_max", c.mixing.n_max, "mixing");
    rd.read(mix, "n_paths", c.mixing.n_paths, "mixing");
  }
  if (auto cons = rd.section(root, "conservativity")) {
    rd.check_keys(cons, "conservativity", {"n_sum", "n_paths", "probes"});
    rd.read(cons, "n_sum", c.conservativity.n_sum, "conservativity");
    rd.read(cons, "n_paths", c.conservativity.n_paths, "conservativity");
    rd.read(cons, "probes", c.conservativity.probes, "conservativity");
  }
  if (auto ext = rd.section(root, "extreme")) {
    rd.check_keys(ext, "extreme", {"n_max", "n_paths", "n_replicates", "n_small"});
    rd.read(ext, "n_max", c.extreme.n_max, "extreme");
    rd.read(ext, "n_paths", c.extreme.n_paths, "extreme");
    rd.read(ext, "n_replicates", c.extreme.n_replicates, "extreme");
    rd.read(ext, "n_small", c.extreme.n_small, "extreme");
  }

  for (auto& e : validate_config(c)) result.errors.push_back(std::move(e));
  if (result.errors.empty()) result.config = std::move(c);
  return result;
}

std::string to_text(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "process" << YAML::Value << to_string(c.process);
  out << YAML::Key << "alpha" << YAML::Value << c.alpha;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "subordinator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.subordinator.kind);
  if (c.subordinator.kind == SubordinatorKind::FBM)
    out << YAML::Key << "hurst" << YAML::Value << c.subordinator.hurst;
  else
    out << YAML::Key << "beta" << YAML::Value << c.subordinator.beta;
  out << YAML::Key << "sigma" << YAML::Value << c.subordinator.sigma << YAML::EndMap;
  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "t_max" << YAML::Value << c.t_max;
  out << YAML::Key << "n_steps" << YAML::Value << c.n_steps << YAML::EndMap;
  out << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
  if (c.half_width)
    out << YAML::Key << "half_width" << YAML::Value << *c.half_width;
  else
    out << YAML::Key << "half_width" << YAML::Value << "auto";
  out << YAML::Key << "cells_per_side" << YAML::Value << c.cells_per_side << YAML::EndMap;
  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_paths" << YAML::Value << c.n_paths;
  out << YAML::Key << "n_replicates" << YAML::Value << c.n_replicates;
  out << YAML::Key << "quantile_p" << YAML::Value << c.quantile_p << YAML::EndMap;
  out << YAML::Key << "experiments" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto e : c.experiments) out << to_string(e);
  out << YAML::EndSeq;
  const auto& t = c.tolerances;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "selfsim_abs" << YAML::Value << t.selfsim_abs;
  out << YAML::Key << "selfsim_r2" << YAML::Value << t.selfsim_r2;
  out << YAML::Key << "charmatch_se" << YAML::Value << t.charmatch_se;
  out << YAML::Key << "signkernel_se" << YAML::Value << t.signkernel_se;
  out << YAML::Key << "ks_level" << YAML::Value << t.ks_level;
  out << YAML::Key << "mixing_ratio" << YAML::Value << t.mixing_ratio;
  out << YAML::Key << "conservativity_min" << YAML::Value << t.conservativity_min;
  out << YAML::Key << "growth_band" << YAML::Value << t.growth_band;
  out << YAML::Key << "extreme_ratio" << YAML::Value << t.extreme_ratio;
  out << YAML::Key << "runtime_budget_s" << YAML::Value << t.runtime_budget_s << YAML::EndMap;
  out << YAML::Key << "mixing" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_max" << YAML::Value << c.mixing.n_max;
  out << YAML::Key << "n_paths" << YAML::Value << c.mixing.n_paths << YAML::EndMap;
  out << YAML::Key << "conservativity" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_sum" << YAML::Value << c.conservativity.n_sum;
  out << YAML::Key << "n_paths" << YAML::Value << c.conservativity.n_paths;
  out << YAML::Key << "probes" << YAML::Value << YAML::Flow << c.conservativity.probes << YAML::EndMap;
  out << YAML::Key << "extreme" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_max" << YAML::Value << c.extreme.n_max;
  out << YAML::Key << "n_paths" << YAML::Value << c.extreme.n_paths;
  out << YAML::Key << "n_replicates" << YAML::Value << c.extreme.n_replicates;
  out << YAML::Key << "n_small" << YAML::Value << c.extreme.n_small << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json exps = nlohmann::json::array();
  for (auto e : c.experiments) exps.push_back(to_string(e));
  const auto& t = c.tolerances;
  return {
      {"process", to_string(c.process)},
      {"alpha", c.alpha},
      {"seed", c.seed},
      {"subordinator",
       {{"kind", to_string(c.subordinator.kind)},
        {"hurst", c.subordinator.hurst},
        {"beta", c.subordinator.beta},
        {"sigma", c.subordinator.sigma}}},
      {"time", {{"t_max", c.t_max}, {"n_steps", c.n_steps}}},
      {"space",
       {{"half_width", c.half_width ? nlohmann::json(*c.half_width) : nlohmann::json("auto")},
        {"cells_per_side", c.cells_per_side}}},
      {"simulation", {{"n_paths", c.n_paths}, {"n_replicates", c.n_replicates}, {"quantile_p", c.quantile_p}}},
      {"experiments", exps},
      {"tolerances",
       {{"selfsim_abs", t.selfsim_abs},
        {"selfsim_r2", t.selfsim_r2},
        {"charmatch_se", t.charmatch_se},
        {"signkernel_se", t.signkernel_se},
        {"ks_level", t.ks_level},
        {"mixing_ratio", t.mixing_ratio},
        {"conservativity_min", t.conservativity_min},
        {"growth_band", t.growth_band},
        {"extreme_ratio", t.extreme_ratio},
        {"runtime_budget_s", t.runtime_budget_s}}},
      {"mixing", {{"n_max", c.mixing.n_max}, {"n_paths", c.mixing.n_paths}}},
      {"conservativity",
       {{"n_sum", c.conservativity.n_sum},
        {"n_paths", c.conservativity.n_paths},
        {"probes", c.conservativity.probes}}},
      {"extreme",
       {{"n_max", c.extreme.n_max},
        {"n_paths", c.extreme.n_paths},
        {"n_replicates", c.extreme.n_replicates},
        {"n_small", c.extreme.n_small}}},
  };
}

}  // namespace ifsm
