#include "wormsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "wormsim/error.hpp"
#include "wormsim/kinetics.hpp"

namespace wormsim::experiments {

abm::SimConfig run_config(const EnsembleSpec& spec, std::size_t index) {
  abm::SimConfig config = spec.base;
  config.seed = rng::derive_seed(spec.seed_base, index);
  return config;
}

std::vector<abm::SimOutput> run_ensemble(const EnsembleSpec& spec, const abm::SimHooks& hooks) {
  if (spec.runs < 1) throw ConfigError({"ensemble needs runs >= 1"});
  for (std::size_t k = 0; k < spec.runs; ++k) {
    auto v = run_config(spec, k).violations();
    if (!v.empty()) {
      for (auto& item : v) item = "run " + std::to_string(k) + ": " + item;
      throw ConfigError(std::move(v));
    }
  }

  std::vector<abm::SimOutput> outputs(spec.runs);
  std::vector<std::exception_ptr> failures(spec.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < spec.runs; k = next++) {
      try {
        abm::Simulation sim(run_config(spec, k), hooks);
        outputs[k] = sim.run();
      } catch (...) {
        failures[k] = std::current_exception();
      }
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(spec.parallelism, 1, spec.runs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t k = 0; k < spec.runs; ++k) {
    if (!failures[k]) continue;
    try {
      std::rethrow_exception(failures[k]);
    } catch (const ConfigError& e) {
      auto v = e.violations();
      for (auto& item : v) item = "run " + std::to_string(k) + ": " + item;
      throw ConfigError(std::move(v));
    } catch (const std::exception& e) {
      throw std::runtime_error("run " + std::to_string(k) + ": " + e.what());
    }
  }
  return outputs;
}

double final_fraction(const abm::SimOutput& output, std::size_t n) {
  if (output.series.empty() || n == 0) return 0.0;
  return (static_cast<double>(n) - output.series.states.back().s) / static_cast<double>(n);
}

bool is_outbreak(const abm::SimOutput& output, std::size_t n) {
  return final_fraction(output, n) > kOutbreakFraction;
}

std::optional<double> fit_growth_rate(const ode::SirSeries& series, double lo, double hi) {
  std::size_t first = 0;
  while (first < series.size() && series.states[first].i < lo) ++first;
  if (first == series.size()) return std::nullopt;

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t count = 0;
  bool crossed = false;
  for (std::size_t k = first; k < series.size(); ++k) {
    const double infected = series.states[k].i;
    if (infected > hi) {
      crossed = true;
      break;
    }
    if (infected < lo) break;  // fell back before taking off
    const double t = series.times[k];
    const double y = std::log(infected);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  if (!crossed || count < 3) return std::nullopt;
  const double c = static_cast<double>(count);
  const double denom = c * stt - st * st;
  if (!(denom > 0.0)) return std::nullopt;
  return (c * sty - st * sy) / denom;
}

double model_beta(const abm::SimConfig& config) {
  const auto params = config.kinetic_params();
  return config.profile == abm::Profile::Chord ? kinetics::beta_chord(params)
                                               : kinetics::beta_basic(params);
}

namespace {

double relative_error(double value, double reference, double fallback_scale) {
  const double diff = std::abs(value - reference);
  if (reference != 0.0) return diff / std::abs(reference);
  return fallback_scale > 0.0 ? diff / fallback_scale : diff;
}

}  // namespace

ComparisonMetrics compare_outputs(const abm::SimConfig& base, std::span<const abm::SimOutput> outputs) {
  if (outputs.empty()) throw DomainError("compare_outputs: no runs");
  const double n = static_cast<double>(base.n);

  std::vector<const abm::SimOutput*> selected;
  for (const auto& out : outputs) {
    if (is_outbreak(out, base.n)) selected.push_back(&out);
  }
  ComparisonMetrics m;
  m.runs = outputs.size();
  m.outbreak_runs = selected.size();
  m.conditioned_on_outbreak = !selected.empty();
  if (selected.empty()) {
    for (const auto& out : outputs) selected.push_back(&out);
  }

  // Every run shares dt and sample_every, so samples align index by index.
  const ode::SirSeries& reference = selected.front()->series;
  m.sim_mean.times = reference.times;
  m.sim_mean.states.assign(reference.size(), {});
  for (const auto* out : selected) {
    if (out->series.size() != reference.size()) {
      throw DomainError("compare_outputs: runs have different sample grids");
    }
    for (std::size_t k = 0; k < reference.size(); ++k) {
      m.sim_mean.states[k].s += out->series.states[k].s;
      m.sim_mean.states[k].i += out->series.states[k].i;
      m.sim_mean.states[k].p += out->series.states[k].p;
    }
  }
  const double inv = 1.0 / static_cast<double>(selected.size());
  for (auto& x : m.sim_mean.states) {
    x.s *= inv;
    x.i *= inv;
    x.p *= inv;
  }

  m.beta = model_beta(base);
  const ode::SirParams params{m.beta, base.delta, n};
  const double i0 = static_cast<double>(base.initial_infected);
  const double sample_interval = base.step() * static_cast<double>(base.sample_every);
  const double substeps = std::ceil(sample_interval / ode::default_step(params) - 1e-9);
  const double ode_dt = sample_interval / std::max(1.0, substeps);
  const ode::SirSeries ode_full =
      ode::integrate_sir(params, {n - i0, i0, 0.0}, reference.times.back(), ode_dt);
  for (double t : reference.times) {
    const auto idx = std::min(static_cast<std::size_t>(std::llround(t / ode_dt)), ode_full.size() - 1);
    m.ode_curve.push_back(t, ode_full.states[idx]);
  }

  for (std::size_t k = 0; k < reference.size(); ++k) {
    m.linf_norm = std::max(m.linf_norm, std::abs(m.sim_mean.states[k].i - m.ode_curve.states[k].i) / n);
  }
  m.peak_sim = ode::peak_infectives(m.sim_mean);
  m.peak_ode = ode::peak_infectives(m.ode_curve);
  m.peak_time_err = relative_error(m.peak_sim.t, m.peak_ode.t, 0.0);
  m.peak_height_err = relative_error(m.peak_sim.i, m.peak_ode.i, n);

  double sum = 0.0, sum2 = 0.0;
  for (const auto* out : selected) {
    const double size = final_fraction(*out, base.n) * n;
    sum += size;
    sum2 += size * size;
  }
  const double count = static_cast<double>(selected.size());
  m.final_size_sim_mean = sum / count;
  m.final_size_sim_sd =
      count > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / count) / (count - 1.0))) : 0.0;
  if (base.delta > 0.0) {
    m.final_size_analytic = ode::final_size(params);
  } else {
    m.final_size_analytic = m.beta > 0.0 ? n : 0.0;
  }

  m.growth_rate_model = m.beta - base.delta;
  double growth_sum = 0.0;
  std::size_t fitted = 0;
  for (const auto* out : selected) {
    if (auto g = fit_growth_rate(out->series, 10.0, n / 20.0)) {
      growth_sum += *g;
      ++fitted;
    }
  }
  if (fitted > 0) m.growth_rate_sim = growth_sum / static_cast<double>(fitted);
  return m;
}

ComparisonMetrics compare_sim_ode(const EnsembleSpec& spec, const abm::SimHooks& hooks) {
  const auto outputs = run_ensemble(spec, hooks);
  return compare_outputs(spec.base, outputs);
}

std::vector<SweepRow> r_sweep(const abm::SimConfig& base, std::span<const double> radii,
                              std::size_t runs, std::uint64_t seed_base, std::size_t parallelism) {
  std::vector<SweepRow> rows;
  for (double radius : radii) {
    SweepRow row;
    row.radius = radius;
    abm::SimConfig config = base;
    config.radius = radius;
    const auto problems = config.violations();
    if (!problems.empty()) {
      row.diagnostic = "skipped R = " + std::to_string(radius) + " m:";
      for (const auto& p : problems) row.diagnostic += " " + p + ";";
    } else {
      row.metrics = compare_sim_ode({config, runs, seed_base, parallelism});
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

ProportionalFit fit_proportional(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("fit_proportional: need matching nonempty data");
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += x[k] * y[k];
    sxx += x[k] * x[k];
  }
  if (!(sxx > 0.0)) throw DomainError("fit_proportional: x must not be all zero");
  ProportionalFit fit;
  fit.slope = sxy / sxx;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double predicted = fit.slope * x[k];
    fit.max_relative_deviation =
        std::max(fit.max_relative_deviation, std::abs(y[k] - predicted) / std::abs(predicted));
  }
  return fit;
}

std::vector<ThresholdRow> threshold_scan(const abm::SimConfig& base, std::span<const double> factors,
                                         std::size_t runs, std::uint64_t seed_base,
                                         std::size_t parallelism) {
  const double vbar = kinetics::mean_speed(base.speed);
  const bool has_threshold = base.p > 0.0 && base.delta > 0.0 && vbar > 0.0;
  const double rho_c =
      has_threshold ? kinetics::critical_density(base.radius, vbar, base.p, base.delta) : base.rho;

  std::vector<ThresholdRow> rows;
  for (double factor : factors) {
    if (!(factor > 0.0)) throw DomainError("threshold_scan: density factors must be > 0");
    ThresholdRow row;
    row.factor = factor;
    row.rho = factor * rho_c;
    row.runs = runs;

    abm::SimConfig config = base;
    config.rho = row.rho;
    // Only the end state matters here.
    config.sample_every = std::max<std::size_t>(config.total_steps(), 1);
    const double beta = model_beta(config);
    row.r0 = config.delta > 0.0 ? beta / config.delta : 0.0;
    if (config.delta > 0.0) {
      row.analytic_fraction = ode::final_size({beta, config.delta, static_cast<double>(config.n)}) /
                          static_cast<double>(config.n);
    }

    const auto outputs = run_ensemble({config, runs, seed_base, parallelism});
    std::size_t outbreaks = 0;
    double outbreak_sum = 0.0, all_sum = 0.0;
    for (const auto& out : outputs) {
      const double fraction = final_fraction(out, config.n);
      all_sum += fraction;
      if (fraction > kOutbreakFraction) {
        ++outbreaks;
        outbreak_sum += fraction;
      }
    }
    row.outbreak_probability = static_cast<double>(outbreaks) / static_cast<double>(runs);
    row.mean_final_fraction = outbreaks > 0 ? outbreak_sum / static_cast<double>(outbreaks) : 0.0;
    row.mean_final_fraction_all_runs = all_sum / static_cast<double>(runs);
    rows.push_back(row);
  }
  return rows;
}

ProfileRatio profile_ratio_experiment(const abm::SimConfig& base, std::size_t runs,
                                      std::uint64_t seed_base, std::size_t parallelism,
                                      const kinetics::TransmissionProfile& chord_override) {
  abm::SimConfig uniform = base;
  uniform.profile = abm::Profile::Uniform;
  abm::SimConfig chord = base;
  chord.profile = abm::Profile::Chord;

  abm::SimHooks chord_hooks;
  chord_hooks.acceptance_override = chord_override;

  ProfileRatio result;
  result.growth_uniform = compare_sim_ode({uniform, runs, seed_base, parallelism}).growth_rate_sim;
  result.growth_chord =
      compare_sim_ode({chord, runs, seed_base, parallelism}, chord_hooks).growth_rate_sim;
  if (result.growth_uniform && result.growth_chord) {
    const double denominator = *result.growth_uniform + base.delta;
    if (denominator > 0.0) result.ratio = (*result.growth_chord + base.delta) / denominator;
  }
  return result;
}

AcceptanceEstimate chord_acceptance_estimate(const abm::SimConfig& base, std::uint64_t min_entries) {
  abm::SimConfig config = base;
  config.p = 0.0;
  if (config.dt == 0.0) config.dt = config.default_dt();
  config.t_end = 1e9;  // stepped manually below

  AcceptanceEstimate estimate;
  const rng::CounterRng counter(config.seed);
  const double radius = config.radius;
  abm::SimHooks hooks;
  hooks.stop_when_extinct = false;
  hooks.on_entry = [&](const abm::EntryEvent& e) {
    const double r = std::clamp(e.impact, 0.0, radius);
    const double accept = std::sqrt(radius * radius - r * r) / radius;
    if (counter.uniform(rng::Stream::ChordProbe, {estimate.entries}) < accept) ++estimate.accepted;
    ++estimate.entries;
  };
  abm::Simulation sim(config, hooks);
  // Stationary moving population: entries keep arriving at a constant rate.
  const std::size_t step_cap = 100000000;
  while (estimate.entries < min_entries && sim.steps_taken() < step_cap) {
    if (config.n < 2 || kinetics::mean_speed(config.speed) == 0.0) break;
    sim.step();
  }
  if (estimate.entries > 0) {
    estimate.ratio = static_cast<double>(estimate.accepted) / static_cast<double>(estimate.entries);
  }
  return estimate;
}

}  // namespace wormsim::experiments
