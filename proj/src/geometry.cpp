#include "wormsim/geometry.hpp"

#include <algorithm>

namespace wormsim::abm {

double wrap_coordinate(double x, double side) {
  double w = std::fmod(x, side);
  if (w < 0.0) w += side;
  // fmod of a tiny negative value plus side can round up to side itself.
  if (w >= side) w = 0.0;
  return w;
}

Vec2 wrap(Vec2 p, double side) { return {wrap_coordinate(p.x, side), wrap_coordinate(p.y, side)}; }

Vec2 min_image(Vec2 from, Vec2 to, double side) {
  const double half = 0.5 * side;
  auto fold = [side, half](double d) {
    if (d > half) return d - side;
    if (d <= -half) return d + side;
    return d;
  };
  return {fold(to.x - from.x), fold(to.y - from.y)};
}

double impact_parameter(Vec2 relpos, Vec2 relvel) {
  const double speed2 = norm2(relvel);
  if (speed2 == 0.0) return norm(relpos);
  return std::abs(cross(relpos, relvel)) / std::sqrt(speed2);
}

std::optional<EntryCrossing> detect_entry(Vec2 relpos, Vec2 relvel, double radius, double dt) {
  // |r + w t|^2 = R^2  <=>  a t^2 + b t + c = 0 with c > 0 outside the disc.
  const double a = norm2(relvel);
  const double b = 2.0 * dot(relpos, relvel);
  const double c = norm2(relpos) - radius * radius;
  if (a == 0.0 || c <= 0.0 || b >= 0.0) return std::nullopt;

  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;

  // b < 0 here, so q > 0 and c / q is the smaller root without cancellation.
  const double q = 0.5 * (-b + std::sqrt(disc));
  const double t = c / q;
  if (!(t > 0.0 && t <= dt)) return std::nullopt;

  return EntryCrossing{t, std::clamp(impact_parameter(relpos, relvel), 0.0, radius)};
}

}  // namespace wormsim::abm
