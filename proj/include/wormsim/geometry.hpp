#pragma once

#include <cmath>
#include <optional>

namespace wormsim::abm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm2(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::sqrt(norm2(a)); }

/// Wraps a coordinate into [0, side).
double wrap_coordinate(double x, double side);
Vec2 wrap(Vec2 p, double side);

/// Displacement `to - from` with each component wrapped into (-side/2, side/2].
Vec2 min_image(Vec2 from, Vec2 to, double side);

struct EntryCrossing {
  double t = 0.0;       ///< time into the step at which distance reaches R
  double impact = 0.0;  ///< closest approach of the relative line, clamped to [0, R]
};

/// For a pair currently outside R, the earliest t in (0, dt] with
/// |relpos + relvel t| = R, if any.
std::optional<EntryCrossing> detect_entry(Vec2 relpos, Vec2 relvel, double radius, double dt);

/// Perpendicular distance from the origin to the line relpos + s relvel.
double impact_parameter(Vec2 relpos, Vec2 relvel);

}  // namespace wormsim::abm
