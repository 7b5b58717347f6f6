#include "radarnav/avoidance.hpp"

#include <cmath>
#include <limits>

namespace radarnav {
namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double angle_between(const Vec2& a, const Vec2& b) { return std::atan2(std::abs(cross(a, b)), a.dot(b)); }

// Positive when inside the cone; how far (rad) the relative velocity is from the boundary.
double penetration(const Vec2& relative_velocity, const CollisionCone& cone) {
  if (relative_velocity.squaredNorm() == 0.0) return -cone.half_angle;
  return cone.half_angle - angle_between(relative_velocity, cone.axis);
}

Vec2 limit(const Vec2& desired, const Vec2& reference, const AvoidanceConfig& config, double dt) {
  Vec2 out = desired;
  const double speed = out.norm();
  if (speed > config.max_speed) out *= config.max_speed / speed;
  const double max_turn = config.max_turn_rate * dt;
  if (reference.norm() > 1e-9 && out.norm() > 1e-9) {
    const double turn = std::atan2(cross(reference, out), reference.dot(out));
    if (std::abs(turn) > max_turn) {
      out = rotate(reference.normalized(), std::copysign(max_turn, turn)) * out.norm();
    }
  }
  return out;
}

}  // namespace

const char* to_string(AvoidanceMode mode) {
  return mode == AvoidanceMode::velocity_obstacle ? "velocity_obstacle" : "side_step";
}

void AvoidanceConfig::validate() const {
  if (!(mav_radius > 0.0)) throw std::invalid_argument("avoidance.mav_radius must be > 0");
  if (!(safety_margin >= 0.0)) throw std::invalid_argument("avoidance.safety_margin must be >= 0");
  if (!(max_speed > 0.0)) throw std::invalid_argument("avoidance.max_speed must be > 0");
  if (!(max_turn_rate > 0.0)) throw std::invalid_argument("avoidance.max_turn_rate must be > 0");
  if (!(side_step_distance > 0.0)) throw std::invalid_argument("avoidance.side_step_distance must be > 0");
}

CollisionCone collision_cone(const Vec2& relative_position, double combined_radius) {
  const double d = relative_position.norm();
  if (d <= combined_radius) throw AlreadyInCollision();
  CollisionCone cone;
  cone.axis = relative_position / d;
  cone.half_angle = std::asin(combined_radius / d);
  cone.distance = d;
  return cone;
}

bool in_cone(const Vec2& relative_velocity, const CollisionCone& cone) {
  if (relative_velocity.squaredNorm() == 0.0) return false;
  return angle_between(relative_velocity, cone.axis) < cone.half_angle;
}

AvoidanceCommand avoid(const Vec2& ego_velocity, const ObstacleEstimate& obstacle, const AvoidanceConfig& config,
                       double dt) {
  const CollisionCone cone = collision_cone(obstacle.relative_position, config.combined_radius(obstacle.radius));
  const Vec2& v_b = obstacle.obstacle_velocity;
  const Vec2 v_ab = ego_velocity - v_b;

  AvoidanceCommand cmd;
  cmd.half_angle = cone.half_angle;
  cmd.in_cone = in_cone(v_ab, cone);
  if (!cmd.in_cone) {
    cmd.velocity = ego_velocity;
    return cmd;
  }

  // Nearer edge; a relative velocity on the axis goes right. The edge is
  // opened by a hair so that the projection lands strictly outside.
  constexpr double kEdgeEps = 1e-9;
  const double offset = std::atan2(cross(cone.axis, v_ab), cone.axis.dot(v_ab));
  const double edge_angle = offset > 0.0 ? cone.half_angle + kEdgeEps : -(cone.half_angle + kEdgeEps);
  const Vec2 edge = rotate(cone.axis, edge_angle);
  const Vec2 desired = v_ab.dot(edge) * edge + v_b;

  const Vec2 limited = limit(desired, ego_velocity, config, dt);
  if (!in_cone(limited - v_b, cone)) {
    cmd.velocity = limited;
    return cmd;
  }

  // Limits pushed the command back inside: search the reachable set.
  constexpr int kSpeedSteps = 20;
  constexpr int kHeadingSteps = 72;
  const bool has_heading = ego_velocity.norm() > 1e-9;
  const double span = has_heading ? std::min(config.max_turn_rate * dt, std::numbers::pi) : std::numbers::pi;
  const Vec2 base = has_heading ? Vec2(ego_velocity.normalized()) : Vec2::UnitX();

  double best_safe = std::numeric_limits<double>::infinity();
  double best_pen = std::numeric_limits<double>::infinity();
  Vec2 safe_choice = Vec2::Zero();
  Vec2 fallback = Vec2::Zero();
  for (int k = 0; k <= kSpeedSteps; ++k) {
    const double speed = config.max_speed * k / kSpeedSteps;
    for (int h = 0; h <= kHeadingSteps; ++h) {
      const Vec2 v = rotate(base, -span + 2.0 * span * h / kHeadingSteps) * speed;
      const double pen = penetration(v - v_b, cone);
      if (pen <= 0.0) {
        const double dist = (v - desired).norm();
        if (dist < best_safe) {
          best_safe = dist;
          safe_choice = v;
        }
      } else if (pen < best_pen) {
        best_pen = pen;
        fallback = v;
      }
      if (k == 0) break;  // heading is irrelevant at zero speed
    }
  }
  if (std::isfinite(best_safe)) {
    cmd.velocity = safe_choice;
  } else {
    cmd.velocity = fallback;
    cmd.unresolved = true;
  }
  return cmd;
}

std::optional<std::size_t> select_nearest(std::span<const ObstacleEstimate> obstacles) {
  std::optional<std::size_t> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const double d = obstacles[i].relative_position.norm();
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  return best;
}

Vec2 side_step(const EgoState& ego, const ObstacleEstimate& obstacle, const AvoidanceConfig& config) {
  const CollisionCone cone = collision_cone(obstacle.relative_position, config.combined_radius(obstacle.radius));
  if (!in_cone(obstacle.relative_velocity, cone)) return Vec2::Zero();
  const double bearing = std::atan2(obstacle.relative_position.y(), obstacle.relative_position.x());
  const double lateral = bearing >= 0.0 ? -config.side_step_distance : config.side_step_distance;
  return ego.to_world(Vec2(0.0, lateral));
}

}  // namespace radarnav
