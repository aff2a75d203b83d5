#pragma once

#include <iosfwd>
#include <vector>

#include "wormsim/kinetics.hpp"

// Deterministic mass-action SIR dynamics of an outbreak: S susceptible,
// I infected, P patched.
namespace wormsim::ode {

struct SirParams {
  double beta = 0.0;   ///< /day
  double delta = 0.0;  ///< /day
  double n = 1.0;      ///< population size

  void validate() const;
};

struct SirState {
  double s = 0.0;
  double i = 0.0;
  double p = 0.0;

  double total() const { return s + i + p; }
  friend bool operator==(const SirState&, const SirState&) = default;
};

struct SirDerivative {
  double ds = 0.0;
  double di = 0.0;
  double dp = 0.0;
};

/// Time-ordered trajectory. Shared immutably once built.
struct SirSeries {
  std::vector<double> times;
  std::vector<SirState> states;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  void push_back(double t, const SirState& state) {
    times.push_back(t);
    states.push_back(state);
  }
  friend bool operator==(const SirSeries&, const SirSeries&) = default;
};

SirDerivative sir_derivative(const SirState& state, const SirParams& params);

/// 0.01 / max(beta, delta); 0.01 if both are zero.
double default_step(const SirParams& params);

/// Classical fixed-step RK4 from t = 0. Samples are at k * dt; if t_end is not
/// a multiple of dt the last step is shortened to land on t_end.
SirSeries integrate_sir(const SirParams& params, const SirState& init, double t_end, double dt);

/// True iff 2 R rho vbar p > delta.
bool epidemic_threshold(const kinetics::KineticParams& params);

/// Largest root of P = N (1 - exp(-(beta / delta) P / N)); exactly 0 when
/// beta / delta <= 1.
double final_size(const SirParams& params);

struct Peak {
  double t = 0.0;
  double i = 0.0;
};

/// Sample of maximal I; ties go to the earliest sample.
Peak peak_infectives(const SirSeries& series);

/// Header `t,s,i,p`.
void write_series_csv(std::ostream& out, const SirSeries& series);

}  // namespace wormsim::ode
