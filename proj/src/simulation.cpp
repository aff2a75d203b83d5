#include "wormsim/simulation.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>
#include <sstream>

#include "wormsim/error.hpp"

namespace wormsim::abm {
namespace {

using std::numbers::pi;

constexpr std::uint64_t kStartKey = ~std::uint64_t{0};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

double SimConfig::side() const { return std::sqrt(static_cast<double>(n) / rho); }

double SimConfig::default_dt() const {
  double mean = 0.0;
  try {
    mean = kinetics::mean_speed(speed);
  } catch (const DomainError&) {
    mean = 0.0;
  }
  if (mean > 0.0) return radius / (8.0 * mean);
  return t_end > 0.0 ? t_end / 1000.0 : 1.0;
}

std::size_t SimConfig::total_steps() const {
  const double h = step();
  if (!(h > 0.0) || !(t_end > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
}

double SimConfig::speed_bound() const {
  return std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, kinetics::ConstantSpeed>) {
          return m.speed;
        } else {
          const double tail = 1e-6 / static_cast<double>(std::max<std::size_t>(n, 1));
          return kinetics::rayleigh_sigma(m.mean) * std::sqrt(-2.0 * std::log(tail));
        }
      },
      speed);
}

kinetics::KineticParams SimConfig::kinetic_params() const {
  return {rho, radius, kinetics::mean_speed(speed), p, delta};
}

std::vector<std::string> SimConfig::violations() const {
  std::vector<std::string> out;
  if (n < 1) out.push_back("n must be >= 1");
  if (!(rho > 0.0 && std::isfinite(rho))) out.push_back("rho must be > 0 (got " + fmt(rho) + " /m^2)");
  if (!(radius > 0.0 && std::isfinite(radius))) out.push_back("R must be > 0 (got " + fmt(radius) + " m)");
  if (!(p >= 0.0 && p <= 1.0)) out.push_back("p must lie in [0, 1] (got " + fmt(p) + ")");
  if (!(delta >= 0.0 && std::isfinite(delta))) out.push_back("delta must be >= 0 (got " + fmt(delta) + " /day)");
  bool speed_ok = true;
  try {
    kinetics::mean_speed(speed);
  } catch (const DomainError& e) {
    out.emplace_back(e.what());
    speed_ok = false;
  }
  if (!(dt >= 0.0 && std::isfinite(dt))) out.push_back("dt must be > 0, or 0 for the default (got " + fmt(dt) + ")");
  if (!(t_end > 0.0 && std::isfinite(t_end))) {
    out.push_back("t_end must be > 0 (got " + fmt(t_end) + " day)");
  } else if (dt > 0.0 && t_end < dt) {
    out.push_back("t_end (" + fmt(t_end) + " day) must be >= dt (" + fmt(dt) + " day)");
  }
  if (initial_infected < 1 || initial_infected > n) {
    out.push_back("initial_infected must lie in [1, n] (got " + std::to_string(initial_infected) +
                  ", n = " + std::to_string(n) + ")");
  }
  if (sample_every < 1) out.push_back("sample_every must be >= 1");

  if (out.empty() && speed_ok) {
    const double side_len = side();
    const double reach = radius + speed_bound() * step();
    if (!(0.5 * side_len > reach)) {
      out.push_back("domain side L = sqrt(n / rho) = " + fmt(side_len) + " m gives L/2 = " +
                    fmt(0.5 * side_len) + " m, which must exceed R + v_max*dt = " + fmt(reach) +
                    " m (minimum-image rule)");
    }
  }
  return out;
}

std::vector<std::string> SimConfig::warnings() const {
  std::vector<std::string> out;
  if (!violations().empty()) return out;
  const double v_max = speed_bound();
  if (v_max > 0.0 && step() > radius / (2.0 * v_max)) {
    out.push_back("dt = " + fmt(step()) + " day exceeds R / (2 v_max) = " +
                  fmt(radius / (2.0 * v_max)) + " day");
  }
  const double ratio = radius / kinetics::mean_spacing(rho);
  if (ratio > kinetics::kDiluteRatioLimit) {
    out.push_back("R / l = " + fmt(ratio) + " exceeds " + fmt(kinetics::kDiluteRatioLimit) +
                  "; contacts are no longer dilute and mass-action rates may not apply");
  }
  return out;
}

void SimConfig::validate() const {
  auto v = violations();
  if (!v.empty()) throw ConfigError(std::move(v));
}

std::vector<Agent> init_population(const SimConfig& config, rng::Engine& engine) {
  config.validate();
  const double side_len = config.side();
  std::vector<Agent> agents(config.n);

  for (std::size_t k = 0; k < config.n; ++k) {
    Agent& a = agents[k];
    a.id = static_cast<std::uint32_t>(k);
    a.pos = {side_len * rng::uniform01(engine), side_len * rng::uniform01(engine)};
    const double heading = 2.0 * pi * rng::uniform01(engine);
    const double speed = std::visit(
        [&engine](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, kinetics::ConstantSpeed>) {
            return m.speed;
          } else {
            // Rayleigh inverse CDF.
            const double u = rng::uniform01(engine);
            return kinetics::rayleigh_sigma(m.mean) * std::sqrt(-2.0 * std::log1p(-u));
          }
        },
        config.speed);
    a.vel = {speed * std::cos(heading), speed * std::sin(heading)};
  }

  // Partial Fisher-Yates picks the index cases uniformly without replacement.
  std::vector<std::uint32_t> ids(config.n);
  for (std::size_t k = 0; k < config.n; ++k) ids[k] = static_cast<std::uint32_t>(k);
  for (std::size_t k = 0; k < config.initial_infected; ++k) {
    const auto span = static_cast<double>(config.n - k);
    const std::size_t j = k + std::min(static_cast<std::size_t>(span * rng::uniform01(engine)),
                                       config.n - k - 1);
    std::swap(ids[k], ids[j]);
    agents[ids[k]].state = Health::Infected;
  }
  return agents;
}

double transmission_probability(const SimConfig& config, double impact) {
  switch (config.profile) {
    case Profile::Uniform:
      return config.p;
    case Profile::Chord: {
      const double r = std::clamp(impact, 0.0, config.radius);
      return config.p * std::sqrt(config.radius * config.radius - r * r) / config.radius;
    }
  }
  return config.p;
}

namespace {
std::vector<Agent> draw_population(const SimConfig& config) {
  rng::Engine engine(config.seed);
  return init_population(config, engine);
}
}  // namespace

Simulation::Simulation(const SimConfig& config, SimHooks hooks)
    : Simulation(config, draw_population(config), std::move(hooks)) {}

Simulation::Simulation(const SimConfig& config, std::vector<Agent> population, SimHooks hooks)
    : config_(config),
      hooks_(std::move(hooks)),
      counter_(config.seed),
      side_((config.validate(), config.side())),
      dt_(config.step()),
      radius2_(config.radius * config.radius),
      total_steps_(config.total_steps()),
      grid_(1.0, 1.0) {
  if (population.size() != config_.n) {
    throw ConfigError({"population has " + std::to_string(population.size()) +
                       " agents but n = " + std::to_string(config_.n)});
  }
  std::sort(population.begin(), population.end(),
            [](const Agent& x, const Agent& y) { return x.id < y.id; });
  for (std::size_t k = 0; k < population.size(); ++k) {
    if (population[k].id != k) throw ConfigError({"agent ids must be 0 .. n-1"});
  }

  const std::size_t n = population.size();
  window_pos_.resize(n);
  vel_.resize(n);
  state_.resize(n);
  t_state_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    window_pos_[k] = wrap(population[k].pos, side_);
    vel_[k] = population[k].vel;
    state_[k] = population[k].state;
    t_state_[k] = population[k].t_state;
    max_speed_ = std::max(max_speed_, norm(vel_[k]));
    switch (state_[k]) {
      case Health::Susceptible: ++s_; break;
      case Health::Infected:
        ++i_;
        infected_.push_back(static_cast<std::uint32_t>(k));
        break;
      case Health::Patched: ++p_; break;
    }
  }

  const double reach = config_.radius + max_speed_ * dt_;
  if (!(0.5 * side_ > reach)) {
    throw ConfigError({"domain side L = " + fmt(side_) + " m gives L/2 = " + fmt(0.5 * side_) +
                       " m, which must exceed R + v_max*dt = " + fmt(reach) +
                       " m (minimum-image rule)"});
  }

  // A pair closes by at most 2 v_max per unit time. The window is sized so
  // this closing distance is about max(4R, 2 l), l the mean spacing, and
  // kept short enough that the scan radius stays under L/2.
  const double closing_per_step = 2.0 * max_speed_ * dt_;
  if (closing_per_step > 0.0) {
    const double skin_target = std::max(4.0 * config_.radius, 2.0 / std::sqrt(config_.rho));
    const double target = std::floor(skin_target / closing_per_step);
    const double room = std::floor((0.5 * side_ - config_.radius) * (1.0 - 1e-9) / closing_per_step);
    window_steps_ = static_cast<std::size_t>(std::max(1.0, std::min(target, room)));
  } else {
    window_steps_ = std::max<std::size_t>(total_steps_, 1);
  }
  window_steps_ = std::min(window_steps_, std::max<std::size_t>(total_steps_, 1));
  all_pairs_ = static_cast<bool>(hooks_.on_entry);
  const double skin = closing_per_step * static_cast<double>(window_steps_);
  grid_ = SpatialGrid(side_, config_.radius + skin, n);

  start_window();
  // Index cases get a trial against anyone already in range at t = 0.
  for (std::uint32_t k = 0; k < state_.size(); ++k) {
    if (state_[k] == Health::Infected) onset_queue_.push_back(k);
  }
  onset_trials(0.0, kStartKey);
  record_sample();
}

double Simulation::acceptance(double impact) const {
  if (hooks_.acceptance_override) return hooks_.acceptance_override(impact);
  return transmission_probability(config_, impact);
}

template <class F>
void Simulation::for_each_near(std::uint32_t k, F&& f) const {
  if (hooks_.scan == PairScan::Grid) {
    grid_.for_each_near(k, f);
  } else {
    for (std::uint32_t j = 0; j < state_.size(); ++j) f(j);
  }
}

void Simulation::queue_entry(std::uint32_t i, std::uint32_t j, Vec2 pos_i, Vec2 pos_j,
                             double t_from) {
  const bool ordered = i < j;
  const std::uint32_t a = ordered ? i : j;
  const std::uint32_t b = ordered ? j : i;
  const Vec2 rel = ordered ? min_image(pos_i, pos_j, side_) : min_image(pos_j, pos_i, side_);
  if (norm2(rel) <= radius2_) return;
  const double horizon = window_end_ - t_from;
  if (!(horizon > 0.0)) return;
  if (auto hit = detect_entry(rel, vel_[b] - vel_[a], config_.radius, horizon)) {
    heap_.push_back({t_from + hit->t, a, b, hit->impact});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
  }
}

void Simulation::start_window() {
  const double t = time();
  if (t != window_t0_) {
    const double elapsed = t - window_t0_;
    for (std::size_t k = 0; k < window_pos_.size(); ++k) {
      window_pos_[k] = wrap(window_pos_[k] + elapsed * vel_[k], side_);
    }
  }
  window_t0_ = t;
  window_first_step_ = steps_;
  window_end_ = static_cast<double>(std::min(steps_ + window_steps_, total_steps_)) * dt_;
  heap_.clear();

  if (hooks_.scan == PairScan::Grid) grid_.rebuild(window_pos_);
  auto consider = [this](std::uint32_t i, std::uint32_t j) {
    queue_entry(i, j, window_pos_[i], window_pos_[j], window_t0_);
  };

  if (all_pairs_) {
    if (hooks_.scan == PairScan::Grid) {
      grid_.for_each_candidate_pair(consider);
    } else {
      const auto n = static_cast<std::uint32_t>(state_.size());
      for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) consider(i, j);
      }
    }
    return;
  }
  for (const std::uint32_t x : infected_) {
    for_each_near(x, [&](std::uint32_t k) {
      if (state_[k] == Health::Susceptible) consider(x, k);
    });
  }
}

void Simulation::infect(std::uint32_t source, std::uint32_t target, double t, double impact) {
  state_[target] = Health::Infected;
  t_state_[target] = t;
  --s_;
  ++i_;
  infected_.push_back(target);
  output_.infections.push_back({t, source, target, impact});
  onset_queue_.push_back(target);
}

void Simulation::process_entry(const PendingEntry& e) {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  if (state_[e.a] == Health::Infected && state_[e.b] == Health::Susceptible) {
    source = e.a;
    target = e.b;
  } else if (state_[e.b] == Health::Infected && state_[e.a] == Health::Susceptible) {
    source = e.b;
    target = e.a;
  } else {
    return;
  }
  ++output_.trials;
  const double u = counter_.uniform(rng::Stream::EntryTrial, {steps_, e.a, e.b});
  if (u < acceptance(e.impact)) {
    onset_queue_.clear();
    infect(source, target, e.t, e.impact);
    onset_trials(e.t, steps_);
  }
}

void Simulation::onset_trials(double t, std::uint64_t step_key) {
  // A newly infected agent trials every susceptible already inside its disc,
  // using the current separation as the impact parameter. Susceptibles still
  // outside get their entry queued.
  for (std::size_t head = 0; head < onset_queue_.size(); ++head) {
    const std::uint32_t x = onset_queue_[head];
    scratch_.clear();
    for_each_near(x, [&](std::uint32_t k) {
      if (state_[k] == Health::Susceptible) scratch_.push_back(k);
    });
    std::sort(scratch_.begin(), scratch_.end());

    const Vec2 px = position_at(x, t);
    for (std::uint32_t k : scratch_) {
      if (state_[k] != Health::Susceptible) continue;
      const Vec2 pk = position_at(k, t);
      const double d2 = norm2(min_image(px, pk, side_));
      if (d2 > radius2_) {
        if (!all_pairs_) queue_entry(x, k, px, pk, t);
        continue;
      }
      const double impact = std::sqrt(d2);
      ++output_.trials;
      const double u = counter_.uniform(rng::Stream::OnsetTrial, {step_key, x, k});
      if (u < acceptance(impact)) infect(x, k, t, impact);
    }
  }
  onset_queue_.clear();
}

void Simulation::step() {
  if (steps_ >= window_first_step_ + window_steps_) start_window();

  const double step_end = static_cast<double>(steps_ + 1) * dt_;
  const bool window_closes = steps_ + 1 >= window_first_step_ + window_steps_ || steps_ + 1 >= total_steps_;
  while (!heap_.empty() && (window_closes || heap_.front().t <= step_end)) {
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    const PendingEntry e = heap_.back();
    heap_.pop_back();
    ++output_.contact_entries;
    if (hooks_.on_entry) hooks_.on_entry({e.t, e.a, e.b, e.impact});
    process_entry(e);
  }

  if (config_.delta > 0.0) {
    const double recover = -std::expm1(-config_.delta * dt_);
    std::size_t kept = 0;
    for (const std::uint32_t k : infected_) {
      if (counter_.uniform(rng::Stream::Recovery, {steps_, k}) < recover) {
        state_[k] = Health::Patched;
        t_state_[k] = step_end;
        --i_;
        ++p_;
      } else {
        infected_[kept++] = k;
      }
    }
    infected_.resize(kept);
  }

  ++steps_;
  record_sample();
}

void Simulation::record_sample() {
  if (steps_ % config_.sample_every == 0 || steps_ == total_steps_) {
    output_.series.push_back(time(), counts());
  }
}

SimOutput Simulation::run() {
  const std::size_t total = total_steps_;
  while (steps_ < total) {
    if (hooks_.stop_when_extinct && i_ == 0) {
      // Nothing can change any more; pad the series at the remaining sample times.
      while (steps_ < total) {
        ++steps_;
        record_sample();
      }
      break;
    }
    step();
  }
  return output_;
}

ode::SirState Simulation::counts() const {
  return {static_cast<double>(s_), static_cast<double>(i_), static_cast<double>(p_)};
}

std::vector<Agent> Simulation::agents() const {
  std::vector<Agent> out(state_.size());
  const double t = time();
  for (std::size_t k = 0; k < state_.size(); ++k) {
    const auto id = static_cast<std::uint32_t>(k);
    out[k] = {id, wrap(position_at(id, t), side_), vel_[k], state_[k], t_state_[k]};
  }
  return out;
}

SimOutput run_simulation(const SimConfig& config) {
  Simulation sim(config);
  return sim.run();
}

}  // namespace wormsim::abm
