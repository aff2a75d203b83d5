#include "wormsim/measurement.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "wormsim/error.hpp"

namespace wormsim::abm {
namespace {

SimConfig observation_config(const SimConfig& config, double t_obs) {
  if (!(t_obs > 0.0)) throw DomainError("observation time must be > 0");
  SimConfig observed = config;
  if (observed.dt == 0.0) observed.dt = config.default_dt();
  observed.p = 0.0;
  observed.t_end = std::max(t_obs, observed.dt);
  return observed;
}

SimHooks observer_hooks(std::function<void(const EntryEvent&)> on_entry) {
  SimHooks hooks;
  hooks.on_entry = std::move(on_entry);
  hooks.stop_when_extinct = false;
  return hooks;
}

}  // namespace

ContactStats measure_contact_rate(const SimConfig& config, double t_obs) {
  const SimConfig observed = observation_config(config, t_obs);
  std::vector<std::uint64_t> per_agent(observed.n, 0);
  ContactStats stats;
  Simulation sim(observed, observer_hooks([&](const EntryEvent& e) {
                   ++per_agent[e.a];
                   ++per_agent[e.b];
                   ++stats.entries;
                 }));
  sim.run();

  stats.agents = observed.n;
  stats.observed_days = sim.time();
  const double n = static_cast<double>(observed.n);
  double sum = 0.0;
  for (auto c : per_agent) sum += static_cast<double>(c);
  stats.mean_rate = sum / n / stats.observed_days;
  if (observed.n > 1) {
    double ss = 0.0;
    for (auto c : per_agent) {
      const double r = static_cast<double>(c) / stats.observed_days - stats.mean_rate;
      ss += r * r;
    }
    stats.sd = std::sqrt(ss / (n - 1.0));
    stats.ci_half_width = 1.959963984540054 * stats.sd / std::sqrt(n);
  }
  return stats;
}

ImpactHistogram::ImpactHistogram(double radius, std::size_t bins)
    : radius_(radius), counts_(std::max<std::size_t>(bins, 1), 0) {
  if (!(radius > 0.0)) throw DomainError("histogram radius must be > 0");
}

void ImpactHistogram::add(double impact) {
  const double scaled = std::clamp(impact / radius_, 0.0, 1.0) * static_cast<double>(counts_.size());
  const auto bin = std::min(static_cast<std::size_t>(scaled), counts_.size() - 1);
  ++counts_[bin];
  ++total_;
}

double ImpactHistogram::chi_square_uniform() const {
  if (total_ == 0) return 0.0;
  const double expected = static_cast<double>(total_) / static_cast<double>(counts_.size());
  double chi2 = 0.0;
  for (auto c : counts_) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  return chi2;
}

double ImpactHistogram::uniform_p_value() const {
  if (counts_.size() < 2 || total_ == 0) return 1.0;
  const boost::math::chi_squared dist(static_cast<double>(counts_.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, chi_square_uniform()));
}

ImpactHistogram impact_histogram(const SimConfig& config, double t_obs, std::size_t bins) {
  const SimConfig observed = observation_config(config, t_obs);
  ImpactHistogram histogram(observed.radius, bins);
  Simulation sim(observed, observer_hooks([&](const EntryEvent& e) { histogram.add(e.impact); }));
  sim.run();
  return histogram;
}

ImpactHistogram impact_histogram(const SimConfig& config, std::vector<Agent> population,
                                 double t_obs, std::size_t bins) {
  const SimConfig observed = observation_config(config, t_obs);
  ImpactHistogram histogram(observed.radius, bins);
  Simulation sim(observed, std::move(population),
                 observer_hooks([&](const EntryEvent& e) { histogram.add(e.impact); }));
  sim.run();
  return histogram;
}

}  // namespace wormsim::abm
