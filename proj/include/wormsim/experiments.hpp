#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wormsim/measurement.hpp"
#include "wormsim/simulation.hpp"
#include "wormsim/sir.hpp"

// Ensembles of simulations compared against the mass-action model.
namespace wormsim::experiments {

/// A run whose ever-infected fraction exceeds this is a major outbreak.
inline constexpr double kOutbreakFraction = 0.10;

struct EnsembleSpec {
  abm::SimConfig base;
  std::size_t runs = 10;
  std::uint64_t seed_base = 1;
  std::size_t parallelism = 1;
};

/// Config of run `index`: the base with seed derived from (seed_base, index).
abm::SimConfig run_config(const EnsembleSpec& spec, std::size_t index);

/// Outputs ordered by run index whatever the completion order. A run that
/// fails configuration checks aborts the ensemble with its index attached.
std::vector<abm::SimOutput> run_ensemble(const EnsembleSpec& spec, const abm::SimHooks& hooks = {});

/// Ever-infected fraction (n - S_final) / n.
double final_fraction(const abm::SimOutput& output, std::size_t n);
bool is_outbreak(const abm::SimOutput& output, std::size_t n);

/// Least-squares slope of ln I(t) over the first stretch with
/// lo <= I <= hi. Empty if I never climbs from lo past hi.
std::optional<double> fit_growth_rate(const ode::SirSeries& series, double lo, double hi);

/// beta_basic or beta_chord, matching the config's profile.
double model_beta(const abm::SimConfig& config);

struct ComparisonMetrics {
  double linf_norm = 0.0;        ///< max |I_sim - I_ode| / N
  double peak_time_err = 0.0;    ///< |t_sim - t_ode| / t_ode
  double peak_height_err = 0.0;  ///< |I_sim - I_ode| / I_ode at the peaks
  double final_size_sim_mean = 0.0;
  double final_size_sim_sd = 0.0;
  double final_size_analytic = 0.0;
  std::optional<double> growth_rate_sim;  ///< /day; empty when no run could be fitted
  double growth_rate_model = 0.0;         ///< beta - delta

  double beta = 0.0;
  ode::Peak peak_sim;
  ode::Peak peak_ode;
  std::size_t runs = 0;
  std::size_t outbreak_runs = 0;
  /// True when the mean curve is taken over major outbreaks only (the
  /// usual case); false when no run took off and all runs were averaged.
  bool conditioned_on_outbreak = false;

  ode::SirSeries sim_mean;
  ode::SirSeries ode_curve;  ///< evaluated on the simulation's sample times
};

/// Metrics for already-computed ensemble outputs of `base`.
ComparisonMetrics compare_outputs(const abm::SimConfig& base, std::span<const abm::SimOutput> outputs);

ComparisonMetrics compare_sim_ode(const EnsembleSpec& spec, const abm::SimHooks& hooks = {});

struct SweepRow {
  double radius = 0.0;
  std::optional<ComparisonMetrics> metrics;
  std::string diagnostic;  ///< why the row was skipped, if it was
};

std::vector<SweepRow> r_sweep(const abm::SimConfig& base, std::span<const double> radii,
                              std::size_t runs, std::uint64_t seed_base = 1,
                              std::size_t parallelism = 1);

struct ProportionalFit {
  double slope = 0.0;
  double max_relative_deviation = 0.0;
};

/// y = k x through the origin by least squares.
ProportionalFit fit_proportional(std::span<const double> x, std::span<const double> y);

struct ThresholdRow {
  double factor = 0.0;
  double rho = 0.0;
  double r0 = 0.0;  ///< model_beta / delta at this density
  double outbreak_probability = 0.0;
  double mean_final_fraction = 0.0;           ///< over major outbreaks; 0 if none
  double mean_final_fraction_all_runs = 0.0;
  double analytic_fraction = 0.0;
  std::size_t runs = 0;
};

/// Runs at rho = factor * rho_c, rho_c = delta / (2 R vbar p). With p = 0
/// there is no critical density and rho = factor * base.rho is used.
std::vector<ThresholdRow> threshold_scan(const abm::SimConfig& base, std::span<const double> factors,
                                         std::size_t runs, std::uint64_t seed_base = 1,
                                         std::size_t parallelism = 1);

struct ProfileRatio {
  std::optional<double> growth_uniform;
  std::optional<double> growth_chord;
  std::optional<double> ratio;  ///< (g_chord + delta) / (g_uniform + delta)
};

/// Identical seeds under both profiles. `chord_override`, if set, replaces
/// the chord-mode transmission probability.
ProfileRatio profile_ratio_experiment(const abm::SimConfig& base, std::size_t runs,
                                      std::uint64_t seed_base = 1, std::size_t parallelism = 1,
                                      const kinetics::TransmissionProfile& chord_override = {});

struct AcceptanceEstimate {
  std::uint64_t entries = 0;
  std::uint64_t accepted = 0;
  double ratio = 0.0;  ///< accepted / entries, expected pi/4
};

/// Draws a chord-weighted Bernoulli trial sqrt(R^2 - r^2) / R for every
/// observed entry (p = 1, no state changes) until at least `min_entries`.
AcceptanceEstimate chord_acceptance_estimate(const abm::SimConfig& base, std::uint64_t min_entries);

}  // namespace wormsim::experiments
