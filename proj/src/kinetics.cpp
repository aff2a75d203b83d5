#include "wormsim/kinetics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wormsim/error.hpp"

namespace wormsim::kinetics {
namespace {

using std::numbers::pi;

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void require_rate_inputs(const KineticParams& params) {
  params.validate();
  require(params.rho > 0.0, "contact rate needs rho > 0");
  require(params.radius > 0.0, "contact rate needs R > 0");
}

}  // namespace

void KineticParams::validate() const {
  require(std::isfinite(rho) && rho >= 0.0, "rho must be finite and >= 0");
  require(std::isfinite(radius) && radius >= 0.0, "R must be finite and >= 0");
  require(std::isfinite(mean_speed) && mean_speed >= 0.0, "mean speed must be finite and >= 0");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  require(std::isfinite(delta) && delta >= 0.0, "delta must be finite and >= 0");
}

double mean_speed(const SpeedModel& model) {
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantSpeed>) {
          require(std::isfinite(m.speed) && m.speed >= 0.0, "constant speed must be >= 0");
          return m.speed;
        } else {
          require(std::isfinite(m.mean) && m.mean > 0.0, "Maxwell-Boltzmann mean speed must be > 0");
          return m.mean;
        }
      },
      model);
}

double rayleigh_sigma(double mean) { return mean * std::sqrt(2.0 / pi); }

double elliptic_e(double m) {
  require(m >= 0.0 && m <= 1.0, "elliptic_e: m must lie in [0, 1]");
  if (m == 0.0) return pi / 2.0;
  if (m == 1.0) return 1.0;

  // E(m) = K(m) * (1 - sum_n 2^(n-1) c_n^2), K(m) = pi / (2 AGM(1, sqrt(1-m))).
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  double weight = 0.5;
  double sum = weight * m;
  for (int iter = 0; iter < 64; ++iter) {
    const double c = 0.5 * (a - b);
    const double a_next = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = a_next;
    weight *= 2.0;
    sum += weight * c * c;
    if (std::abs(c) <= 1e-17 * a) break;
  }
  return pi / (2.0 * a) * (1.0 - sum);
}

double elliptic_e_quadrature(double m) {
  require(m >= 0.0 && m <= 1.0, "elliptic_e_quadrature: m must lie in [0, 1]");
  auto integrand = [m](double w) {
    const double s = std::sin(w);
    return std::sqrt(1.0 - m * s * s);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, pi / 2.0,
                                                                        20, 1e-15);
}

double contact_rate_pair(double v_i, double v, const KineticParams& params) {
  require(v_i >= 0.0 && v >= 0.0, "contact_rate_pair: speeds must be >= 0");
  require_rate_inputs(params);
  const double sum = v_i + v;
  if (sum == 0.0) return 0.0;
  const double m = std::min(1.0, 4.0 * v_i * v / (sum * sum));
  return 4.0 / pi * params.radius * params.rho * sum * elliptic_e(m);
}

double contact_rate_population(const SpeedModel& speed, const KineticParams& params) {
  require_rate_inputs(params);
  return 8.0 / pi * params.radius * params.rho * mean_speed(speed);
}

double beta_basic(const KineticParams& params) {
  params.validate();
  return 8.0 / pi * params.radius * params.rho * params.mean_speed * params.p;
}

double beta_chord(const KineticParams& params) {
  params.validate();
  return 2.0 * params.radius * params.rho * params.mean_speed * params.p;
}

double beta_profile(const KineticParams& params, const TransmissionProfile& profile) {
  params.validate();
  if (params.radius == 0.0) return 0.0;
  auto checked = [&profile](double r) {
    const double value = profile(r);
    if (!(value >= 0.0 && value <= 1.0)) {
      throw DomainError("transmission profile value " + std::to_string(value) + " at r = " +
                        std::to_string(r) + " is outside [0, 1]");
    }
    return value;
  };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      checked, 0.0, params.radius, 25, 1e-14);
  return 8.0 / pi * params.rho * params.mean_speed * integral;
}

double critical_density(double radius, double mean_speed, double p, double delta) {
  require(radius > 0.0 && mean_speed > 0.0 && p > 0.0 && delta > 0.0,
          "critical_density: R, vbar, p and delta must all be > 0");
  return delta / (2.0 * radius * mean_speed * p);
}

double r0(double beta, double delta) {
  require(delta > 0.0, "r0: delta must be > 0");
  return beta / delta;
}

double mean_spacing(double rho) {
  require(rho > 0.0, "mean_spacing: rho must be > 0");
  return 1.0 / std::sqrt(rho);
}

}  // namespace wormsim::kinetics
