#include "ifsm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ifsm {

std::string LinearForm::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    if (j) os << ',';
    os << terms[j].theta << ':' << terms[j].t << ':' << terms[j].s;
  }
  return os.str();
}

LinearForm LinearForm::parse(const std::string& text) {
  LinearForm form;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    FormTerm term;
    char c1 = 0, c2 = 0;
    std::istringstream one(item);
    if (!(one >> term.theta >> c1 >> term.t)) throw std::invalid_argument("bad form term '" + item + "'");
    if (c1 != ':') throw std::invalid_argument("bad form term '" + item + "'");
    if (one >> c2) {
      if (c2 != ':' || !(one >> term.s)) throw std::invalid_argument("bad form term '" + item + "'");
    }
    form.terms.push_back(term);
  }
  if (form.terms.empty()) throw std::invalid_argument("empty linear form");
  return form;
}

void LinearForm::validate(const TimeGrid& grid) const {
  if (terms.empty()) throw std::invalid_argument("linear form needs at least one term");
  for (const auto& term : terms) {
    if (!std::isfinite(term.theta)) throw std::invalid_argument("linear form: non-finite theta");
    grid.index_of(term.t);
    grid.index_of(term.s);
  }
}

std::vector<double> LinearForm::times() const {
  std::set<double> ts;
  for (const auto& term : terms) {
    ts.insert(term.t);
    ts.insert(term.s);
  }
  return {ts.begin(), ts.end()};
}

namespace {

// 1 on the closed interval between 0 and a (either orientation).
inline bool between(double x, double lo_end, double hi_end) {
  return x >= std::min(lo_end, hi_end) && x <= std::max(lo_end, hi_end);
}

struct ResolvedTerm {
  double theta;
  std::size_t t_index;
  std::size_t s_index;
};

double step_integral(const std::vector<ResolvedTerm>& terms, KernelKind kind, std::span<const double> ends_t,
                     std::span<const double> ends_s, const SpatialGrid& grid, double alpha,
                     std::vector<double>& breaks) {
  breaks.clear();
  breaks.push_back(0.0);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    breaks.push_back(grid.clip(ends_t[j]));
    breaks.push_back(grid.clip(ends_s[j]));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double total = 0.0;
  for (std::size_t l = 0; l + 1 < breaks.size(); ++l) {
    const double x = 0.5 * (breaks[l] + breaks[l + 1]);
    double h = 0.0;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double a_t = grid.clip(ends_t[j]);
      const double a_s = grid.clip(ends_s[j]);
      double g = 0.0;
      if (kind == KernelKind::Indicator) {
        g = (between(x, 0.0, a_t) ? 1.0 : 0.0) - (between(x, 0.0, a_s) ? 1.0 : 0.0);
      } else if (between(x, a_s, a_t)) {
        g = a_t > a_s ? 1.0 : (a_t < a_s ? -1.0 : 0.0);
      }
      h += terms[j].theta * g;
    }
    if (h != 0.0) total += (breaks[l + 1] - breaks[l]) * std::pow(std::abs(h), alpha);
  }
  return total;
}

std::vector<ResolvedTerm> resolve(const LinearForm& form, const TimeGrid& grid) {
  form.validate(grid);
  std::vector<ResolvedTerm> out;
  for (const auto& term : form.terms) out.push_back({term.theta, grid.index_of(term.t), grid.index_of(term.s)});
  return out;
}

}  // namespace

std::vector<double> exponent_integrands(const LinearForm& form, const Kernel& kernel,
                                        const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                                        StableSpec spec) {
  const auto terms = resolve(form, ensemble.grid);
  const double alpha = spec.alpha();
  const std::size_t k = terms.size();

  if (kernel.kind == KernelKind::LevyDeterministic) {
    std::vector<double> ends_t(k), ends_s(k), breaks;
    for (std::size_t j = 0; j < k; ++j) {
      ends_t[j] = ensemble.grid.at(terms[j].t_index);
      ends_s[j] = ensemble.grid.at(terms[j].s_index);
    }
    return {step_integral(terms, KernelKind::SignedIndicator, ends_t, ends_s, grid, alpha, breaks)};
  }

  std::vector<double> per_path(ensemble.n_paths, 0.0);
  if (kernel.kind == KernelKind::LocalTime) {
    const LocalTimeField* lt = kernel.local_time;
    if (lt == nullptr) throw std::invalid_argument("LocalTime kernel needs a local time field");
    if (lt->n_paths() != ensemble.n_paths || !(lt->grid() == grid))
      throw std::invalid_argument("local time field does not match the ensemble and x-grid");
    // L(0, .) = 0, so time 0 needs no slot in the field.
    constexpr std::size_t kZero = static_cast<std::size_t>(-1);
    auto slot = [lt](std::size_t index) { return index == 0 ? kZero : lt->slot_of(index); };
    auto density = [lt](std::size_t i, std::size_t s, std::size_t offset) {
      return s == kZero ? 0.0 : lt->row(i, s)[offset];
    };
    std::vector<std::size_t> t_slot(k), s_slot(k);
    for (std::size_t j = 0; j < k; ++j) {
      t_slot[j] = slot(terms[j].t_index);
      s_slot[j] = slot(terms[j].s_index);
    }
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
      const auto [first, last] = lt->cell_range(i);
      double acc = 0.0;
      for (std::size_t c = first; c < last; ++c) {
        double h = 0.0;
        for (std::size_t j = 0; j < k; ++j)
          h += terms[j].theta * (density(i, t_slot[j], c - first) - density(i, s_slot[j], c - first));
        if (h != 0.0) acc += std::pow(std::abs(h), alpha);
      }
      per_path[i] = acc * grid.dx();
    }
    return per_path;
  }

#pragma omp parallel
  {
    std::vector<double> ends_t(k), ends_s(k), breaks;
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < ensemble.n_paths; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        ends_t[j] = ensemble.at(i, terms[j].t_index);
        ends_s[j] = ensemble.at(i, terms[j].s_index);
      }
      per_path[i] = step_integral(terms, kernel.kind, ends_t, ends_s, grid, alpha, breaks);
    }
  }
  return per_path;
}

CharFunctionalEstimate exponent_integral(const LinearForm& form, const Kernel& kernel,
                                         const SubordinatorEnsemble& ensemble, const SpatialGrid& grid,
                                         StableSpec spec, double truncation_tolerance) {
  const auto v = exponent_integrands(form, kernel, ensemble, grid, spec);
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);

  CharFunctionalEstimate est;
  est.exponent = mean;
  est.value = std::exp(-mean);
  est.std_error = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  if (kernel.kind != KernelKind::LevyDeterministic) {
    for (double t : form.times())
      est.truncated_mass = std::max(est.truncated_mass, truncation_mass(ensemble, grid, ensemble.grid.index_of(t)));
  } else {
    for (double t : form.times()) est.truncated_mass = std::max(est.truncated_mass, std::max(0.0, t - grid.half_width()));
  }
  if (est.truncated_mass > truncation_tolerance)
    spdlog::warn("exponent_integral: truncated kernel mass {:.3g} exceeds tolerance {:.3g} for form {}",
                 est.truncated_mass, truncation_tolerance, form.to_string());
  return est;
}

ComplexEstimate empirical_char(const std::vector<ProcessSample>& samples, const LinearForm& form) {
  if (samples.size() < kMinCharReplicates)
    throw std::invalid_argument("empirical_char needs at least " + std::to_string(kMinCharReplicates) +
                                " replicates, got " + std::to_string(samples.size()));
  // Resolve time positions once against the first sample's layout; Y(0) = 0
  // need not be simulated.
  constexpr std::size_t kOrigin = static_cast<std::size_t>(-1);
  const auto& layout = samples.front().times;
  auto position = [&](double t) {
    for (std::size_t s = 0; s < layout.size(); ++s)
      if (std::abs(layout[s] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return s;
    if (t == 0.0) return kOrigin;
    throw std::invalid_argument("empirical_char: time " + std::to_string(t) + " missing from samples");
  };
  std::vector<std::pair<std::size_t, std::size_t>> pos;
  for (const auto& term : form.terms) pos.emplace_back(position(term.t), position(term.s));

  auto value = [](const ProcessSample& sample, std::size_t s) { return s == kOrigin ? 0.0 : sample.values[s]; };
  double sum_c = 0.0, sum_s = 0.0, sum_c2 = 0.0, sum_s2 = 0.0;
  for (const auto& sample : samples) {
    double arg = 0.0;
    for (std::size_t j = 0; j < pos.size(); ++j)
      arg += form.terms[j].theta * (value(sample, pos[j].first) - value(sample, pos[j].second));
    const double c = std::cos(arg), s = std::sin(arg);
    sum_c += c;
    sum_s += s;
    sum_c2 += c * c;
    sum_s2 += s * s;
  }
  const double n = static_cast<double>(samples.size());
  ComplexEstimate est;
  est.n = samples.size();
  est.re = sum_c / n;
  est.im = sum_s / n;
  est.se_re = std::sqrt(std::max(0.0, sum_c2 / n - est.re * est.re) / (n - 1.0));
  est.se_im = std::sqrt(std::max(0.0, sum_s2 / n - est.im * est.im) / (n - 1.0));
  return est;
}

std::vector<LinearForm> standard_form_panel(double unit) {
  auto u = [unit](double t) { return t * unit; };
  return {
      LinearForm{{{1.0, u(1), 0}}},
      LinearForm{{{0.5, u(2), 0}}},
      LinearForm{{{1.0, u(1), 0}, {-1.0, u(2), 0}}},
      LinearForm{{{0.7, u(2), u(1)}}},
      LinearForm{{{1.0, u(1), 0}, {0.5, u(3), u(2)}}},
      LinearForm{{{-0.8, u(1), 0}, {0.6, u(2), 0}, {0.4, u(3), 0}}},
      LinearForm{{{2.0, u(0.5), 0}}},
      LinearForm{{{0.3, u(1), 0}, {0.3, u(2), u(1)}, {0.3, u(3), u(2)}}},
      LinearForm{{{1.5, u(3), u(1)}, {-1.0, u(2), 0}}},
      LinearForm{{{0.4, u(0.5), 0}, {-0.9, u(3), u(1)}, {0.5, u(2), u(0.5)}}},
  };
}

}  // namespace ifsm
