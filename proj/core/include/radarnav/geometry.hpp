#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace radarnav {

using Vec2 = Eigen::Vector2d;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
}

/// Planar ego pose. Body frame: +x along heading, +y to the left.
struct EgoState {
  Vec2 position = Vec2::Zero();
  double heading = 0.0;  // rad, world frame
  Vec2 velocity = Vec2::Zero();  // m/s, world frame

  Vec2 to_body(const Vec2& world_vector) const { return rotate(world_vector, -heading); }
  Vec2 to_world(const Vec2& body_vector) const { return rotate(body_vector, heading); }
};

}  // namespace radarnav
