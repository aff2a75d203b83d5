#include "wormsim/sir.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wormsim/error.hpp"

namespace wormsim::ode {
namespace {

SirState advance(const SirState& x, const SirDerivative& k, double h) {
  return {x.s + h * k.ds, x.i + h * k.di, x.p + h * k.dp};
}

SirState rk4_step(const SirState& x, const SirParams& params, double h) {
  const SirDerivative k1 = sir_derivative(x, params);
  const SirDerivative k2 = sir_derivative(advance(x, k1, 0.5 * h), params);
  const SirDerivative k3 = sir_derivative(advance(x, k2, 0.5 * h), params);
  const SirDerivative k4 = sir_derivative(advance(x, k3, h), params);
  return {x.s + h / 6.0 * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds),
          x.i + h / 6.0 * (k1.di + 2.0 * k2.di + 2.0 * k3.di + k4.di),
          x.p + h / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp)};
}

SirState clamped(SirState x) {
  x.s = std::max(0.0, x.s);
  x.i = std::max(0.0, x.i);
  x.p = std::max(0.0, x.p);
  return x;
}

// g(z) = 1 - exp(-r0 z) - z, positive between 0 and the nontrivial root.
double excess(double z, double r0) { return -std::expm1(-r0 * z) - z; }

}  // namespace

void SirParams::validate() const {
  if (!(beta >= 0.0 && std::isfinite(beta))) throw DomainError("SIR: beta must be >= 0");
  if (!(delta >= 0.0 && std::isfinite(delta))) throw DomainError("SIR: delta must be >= 0");
  if (!(n >= 1.0 && std::isfinite(n))) throw DomainError("SIR: n must be >= 1");
}

SirDerivative sir_derivative(const SirState& state, const SirParams& params) {
  const double incidence = params.beta * state.s * state.i / params.n;
  const double recovery = params.delta * state.i;
  return {-incidence, incidence - recovery, recovery};
}

double default_step(const SirParams& params) {
  const double fastest = std::max(params.beta, params.delta);
  return fastest > 0.0 ? 0.01 / fastest : 0.01;
}

SirSeries integrate_sir(const SirParams& params, const SirState& init, double t_end, double dt) {
  params.validate();
  if (!(dt > 0.0)) throw DomainError("integrate_sir: dt must be > 0");
  if (!(t_end > 0.0)) throw DomainError("integrate_sir: t_end must be > 0");
  if (init.s < 0.0 || init.i < 0.0 || init.p < 0.0) {
    throw DomainError("integrate_sir: initial state must be nonnegative");
  }

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  SirSeries series;
  series.times.reserve(steps + 1);
  series.states.reserve(steps + 1);
  series.push_back(0.0, init);

  SirState x = init;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const double t_next = std::min(static_cast<double>(k) * dt, t_end);
    x = rk4_step(x, params, t_next - t_prev);
    series.push_back(k == steps ? t_end : t_next, clamped(x));
  }
  return series;
}

bool epidemic_threshold(const kinetics::KineticParams& params) {
  return kinetics::beta_chord(params) > params.delta;
}

double final_size(const SirParams& params) {
  params.validate();
  if (!(params.delta > 0.0)) throw DomainError("final_size: delta must be > 0");
  const double r0 = params.beta / params.delta;
  if (r0 <= 1.0) return 0.0;

  // Damped fixed point z <- 1 - exp(-r0 z) from z = 1. The map's slope at the
  // root is r0 exp(-r0 z) < 1, so this converges; slowly when r0 is near 1.
  double z = 1.0;
  bool converged = false;
  for (int iter = 0; iter < 500; ++iter) {
    const double next = 0.5 * z + 0.5 * (-std::expm1(-r0 * z));
    if (std::abs(next - z) <= 1e-16) {
      z = next;
      converged = true;
      break;
    }
    z = next;
  }

  if (!converged || excess(z, r0) != 0.0) {
    // Bracket the root and bisect: g > 0 just above 0, g(1) < 0.
    double hi = 1.0;
    double lo = std::min(z, 1.0);
    while (lo > 0.0 && excess(lo, r0) <= 0.0) lo *= 0.5;
    if (excess(z, r0) < 0.0) hi = z;
    for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (excess(mid, r0) > 0.0 ? lo : hi) = mid;
    }
    z = std::abs(excess(lo, r0)) <= std::abs(excess(hi, r0)) ? lo : hi;
  }
  return z * params.n;
}

Peak peak_infectives(const SirSeries& series) {
  if (series.empty()) throw DomainError("peak_infectives: empty series");
  Peak peak{series.times.front(), series.states.front().i};
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series.states[k].i > peak.i) peak = {series.times[k], series.states[k].i};
  }
  return peak;
}

void write_series_csv(std::ostream& out, const SirSeries& series) {
  const auto old_precision = out.precision(12);
  out << "t,s,i,p\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const SirState& x = series.states[k];
    out << series.times[k] << ',' << x.s << ',' << x.i << ',' << x.p << '\n';
  }
  out.precision(old_precision);
}

}  // namespace wormsim::ode
