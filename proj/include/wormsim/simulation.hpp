#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wormsim/geometry.hpp"
#include "wormsim/kinetics.hpp"
#include "wormsim/rng.hpp"
#include "wormsim/sir.hpp"
#include "wormsim/spatial_grid.hpp"

// Individual-based worm spread among straight-line movers on a torus.
namespace wormsim::abm {

enum class Health : std::uint8_t { Susceptible, Infected, Patched };

struct Agent {
  std::uint32_t id = 0;
  Vec2 pos;
  Vec2 vel;  ///< m/day, fixed for the whole run
  Health state = Health::Susceptible;
  double t_state = 0.0;  ///< day of the last state change

  friend bool operator==(const Agent&, const Agent&) = default;
};

/// How an entry's impact parameter maps to a transmission probability.
enum class Profile {
  Uniform,  ///< p for every entry
  Chord,    ///< p sqrt(R^2 - r^2) / R
};

struct SimConfig {
  std::size_t n = 10000;
  double rho = 3e-3;    ///< /m^2
  double radius = 5.0;  ///< m
  double p = 0.1;
  double delta = 1.0;  ///< /day
  kinetics::SpeedModel speed = kinetics::ConstantSpeed{2000.0};
  Profile profile = Profile::Uniform;
  double dt = 0.0;  ///< days; 0 selects default_dt()
  double t_end = 15.0;
  std::uint64_t seed = 1;
  std::size_t initial_infected = 1;
  std::size_t sample_every = 1;  ///< steps between series samples

  /// Torus side L = sqrt(n / rho).
  double side() const;
  /// R / (8 vbar): a quarter of R over twice the mean speed.
  double default_dt() const;
  double step() const { return dt > 0.0 ? dt : default_dt(); }
  std::size_t total_steps() const;
  /// Largest speed assumed by validation: exact for constant speeds, the
  /// 1 - 1e-6/n Rayleigh quantile otherwise.
  double speed_bound() const;

  kinetics::KineticParams kinetic_params() const;

  std::vector<std::string> violations() const;
  /// Soft issues: coarse dt, non-dilute R / l.
  std::vector<std::string> warnings() const;
  /// Throws ConfigError listing every violation.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct InfectionEvent {
  double t = 0.0;
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  double impact = 0.0;  ///< m

  friend bool operator==(const InfectionEvent&, const InfectionEvent&) = default;
};

/// One outside-to-inside crossing of the radius-R circle by a pair.
struct EntryEvent {
  double t = 0.0;  ///< absolute time, days
  std::uint32_t a = 0;  ///< lower id
  std::uint32_t b = 0;
  double impact = 0.0;

  friend bool operator==(const EntryEvent&, const EntryEvent&) = default;
};

struct SimOutput {
  ode::SirSeries series;
  std::vector<InfectionEvent> infections;
  /// Entries handled by the stepper: every pair entry when an observer is
  /// installed, otherwise entries with an infected member.
  std::uint64_t contact_entries = 0;
  std::uint64_t trials = 0;  ///< Bernoulli trials run (entries and onsets)

  friend bool operator==(const SimOutput&, const SimOutput&) = default;
};

enum class PairScan { Grid, BruteForce };

struct SimHooks {
  PairScan scan = PairScan::Grid;
  /// Sees every entry of every pair, whatever the pair's health states.
  std::function<void(const EntryEvent&)> on_entry;
  /// Replaces the profile's transmission probability (given impact, m).
  kinetics::TransmissionProfile acceptance_override;
  /// Stop stepping once no agent is infected; the series is padded.
  bool stop_when_extinct = true;
};

/// Positions uniform on [0, L)^2, headings uniform, speeds from the model,
/// `initial_infected` agents picked uniformly.
std::vector<Agent> init_population(const SimConfig& config, rng::Engine& engine);

/// Entry transmission probability for the config's profile.
double transmission_probability(const SimConfig& config, double impact);

/// Stepper. Motion is straight-line, so pair entry times are solved exactly
/// over a window of several steps: at each window start the population is
/// bucketed on a grid whose cells cover every pair that could come within R
/// before the window ends, and crossing times are queued. Entries are then
/// handled one step at a time in time order. Unless an entry observer is
/// installed only pairs with an infected member are scanned, since no other
/// entry can transmit.
class Simulation {
 public:
  /// Draws the population from config.seed.
  explicit Simulation(const SimConfig& config, SimHooks hooks = {});
  /// Uses a caller-supplied population (positions are wrapped into the torus).
  Simulation(const SimConfig& config, std::vector<Agent> population, SimHooks hooks = {});

  /// Advance by one dt: entries and their trials in time order, then
  /// recoveries at the end of the step.
  void step();

  /// Steps to t_end and returns everything recorded so far.
  SimOutput run();

  double time() const { return static_cast<double>(steps_) * dt_; }
  std::size_t steps_taken() const { return steps_; }
  double side() const { return side_; }
  double max_speed() const { return max_speed_; }
  /// Steps per entry-scan window.
  std::size_t window_steps() const { return window_steps_; }
  ode::SirState counts() const;
  /// Population at the current time.
  std::vector<Agent> agents() const;
  const SimConfig& config() const { return config_; }
  const SimOutput& output() const { return output_; }

 private:
  struct PendingEntry {
    double t;  ///< absolute
    std::uint32_t a;
    std::uint32_t b;
    double impact;

    bool operator>(const PendingEntry& o) const {
      if (t != o.t) return t > o.t;
      if (a != o.a) return a > o.a;
      return b > o.b;
    }
  };

  void start_window();
  void queue_entry(std::uint32_t i, std::uint32_t j, Vec2 pos_i, Vec2 pos_j, double t_from);
  void process_entry(const PendingEntry& e);
  void infect(std::uint32_t source, std::uint32_t target, double t, double impact);
  void onset_trials(double t, std::uint64_t step_key);
  void record_sample();
  double acceptance(double impact) const;
  Vec2 position_at(std::uint32_t k, double t) const {
    return window_pos_[k] + (t - window_t0_) * vel_[k];
  }
  template <class F>
  void for_each_near(std::uint32_t k, F&& f) const;

  SimConfig config_;
  SimHooks hooks_;
  rng::CounterRng counter_;
  double side_;
  double dt_;
  double radius2_;
  double max_speed_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t total_steps_ = 0;
  std::size_t window_steps_ = 1;
  bool all_pairs_ = false;

  std::vector<Vec2> window_pos_;  ///< positions at window_t0_
  std::vector<Vec2> vel_;
  std::vector<Health> state_;
  std::vector<double> t_state_;
  std::vector<std::uint32_t> infected_;
  std::size_t s_ = 0, i_ = 0, p_ = 0;

  double window_t0_ = 0.0;
  double window_end_ = 0.0;
  std::size_t window_first_step_ = 0;
  SpatialGrid grid_;
  std::vector<PendingEntry> heap_;
  std::vector<std::uint32_t> onset_queue_;
  std::vector<std::uint32_t> scratch_;
  SimOutput output_;
};

/// Builds and runs one simulation.
SimOutput run_simulation(const SimConfig& config);

}  // namespace wormsim::abm
