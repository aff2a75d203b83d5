#pragma once

#include <functional>
#include <variant>

// Contact and transmission rates for straight-line movers in the plane.
// Units: meters, days.
namespace wormsim::kinetics {

struct KineticParams {
  double rho = 0.0;         ///< agents per m^2
  double radius = 0.0;      ///< contact radius R, m
  double mean_speed = 0.0;  ///< m/day
  double p = 0.0;           ///< per-contact transmission probability
  double delta = 0.0;       ///< recovery (patch) rate, /day

  /// Throws DomainError on negative fields or p > 1.
  void validate() const;
};

struct ConstantSpeed {
  double speed = 0.0;
  friend bool operator==(const ConstantSpeed&, const ConstantSpeed&) = default;
};

/// Rayleigh-distributed speeds (isotropic 2D Gaussian velocity), given by mean.
struct MaxwellBoltzmann2D {
  double mean = 0.0;
  friend bool operator==(const MaxwellBoltzmann2D&, const MaxwellBoltzmann2D&) = default;
};

using SpeedModel = std::variant<ConstantSpeed, MaxwellBoltzmann2D>;

double mean_speed(const SpeedModel& model);

/// Rayleigh scale sigma with sigma * sqrt(pi / 2) == mean.
double rayleigh_sigma(double mean);

/// Complete elliptic integral of the second kind, parameter convention:
/// E(m) = int_0^{pi/2} sqrt(1 - m sin^2 w) dw, 0 <= m <= 1. Computed by the
/// arithmetic-geometric mean.
double elliptic_e(double m);

/// Same integral by adaptive Gauss-Kronrod quadrature; slower, kept for
/// cross-checking the AGM path.
double elliptic_e_quadrature(double m);

/// Mean rate at which agents of speed `v` enter the radius-R disc of an
/// agent moving at `v_i`, headings uniform in azimuth.
double contact_rate_pair(double v_i, double v, const KineticParams& params);

/// (8/pi) R rho vbar with vbar the model's mean speed.
double contact_rate_population(const SpeedModel& speed, const KineticParams& params);

/// Transmission rate when every entry transmits with probability p.
double beta_basic(const KineticParams& params);

/// Transmission rate when the per-entry probability is weighted by chord
/// length: p(r) = (p / R) sqrt(R^2 - r^2). Equals 2 R rho vbar p.
double beta_chord(const KineticParams& params);

using TransmissionProfile = std::function<double(double impact)>;

/// (8/pi) rho vbar * int_0^R profile(r) dr by adaptive quadrature. Throws
/// DomainError if the profile leaves [0, 1] anywhere it is evaluated.
double beta_profile(const KineticParams& params, const TransmissionProfile& profile);

/// rho_c = delta / (2 R vbar p).
double critical_density(double radius, double mean_speed, double p, double delta);

double r0(double beta, double delta);

/// Mean inter-agent spacing rho^{-1/2}.
double mean_spacing(double rho);

/// Validators flag configurations where R / l exceeds this.
inline constexpr double kDiluteRatioLimit = 0.25;

}  // namespace wormsim::kinetics
